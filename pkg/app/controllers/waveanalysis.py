"""Fronts, speeds, plateaus and phase traces read off a sequence of snapshots."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.controllers.twode import inversion_relation, plateau_relations, slow_plateau_relation
from app.models.analysis import (
    AnalysisOptions,
    AnalysisReport,
    ClassifiedFront,
    FrontKind,
    FrontTrack,
    PhaseTrace,
    Plateau,
    PlateauState,
    RelationCheck,
    RelationReport,
    Side,
)
from app.models.simulation import Grid, RunResult, Snapshot
from app.utils.errors import DomainError, InsufficientDataError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 4


# ---------------------------------------------------------------------------
# fronts
# ---------------------------------------------------------------------------

def _field(snap: Snapshot, field: str) -> np.ndarray:
    if field == "u":
        return snap.fields.u
    if field == "w":
        return snap.fields.w
    raise DomainError(f"unknown field '{field}'", {"field": field})


def _crossings(x: np.ndarray, values: np.ndarray, level: float) -> List[Tuple[float, bool]]:
    """Sub-cell positions where values - level changes sign, with orientation."""
    above = values > level
    idx = np.nonzero(above[:-1] != above[1:])[0]
    v0, v1 = values[idx], values[idx + 1]
    pos = x[idx] + (level - v0) / (v1 - v0) * (x[idx + 1] - x[idx])
    return list(zip(pos.tolist(), (v1 > v0).tolist()))


def detect_fronts(snaps: Sequence[Snapshot], grid: Grid, field: str = "w", level: float = 0.5,
                  c_max: float = 4.0) -> List[FrontTrack]:
    """Follow level crossings through the snapshots by nearest-neighbour continuation."""
    if len(snaps) < MIN_SAMPLES:
        raise InsufficientDataError(
            f"front detection needs at least {MIN_SAMPLES} snapshots", {"snapshots": len(snaps)}
        )
    x = grid.x
    open_tracks: List[FrontTrack] = []
    closed: List[FrontTrack] = []

    for n, snap in enumerate(snaps):
        found = _crossings(x, _field(snap, field), level)
        if n == 0:
            open_tracks = [
                FrontTrack(field=field, level=level, rising=r, samples=[(snap.time, p)]) for p, r in found
            ]
            continue

        window = 2.0 * c_max * (snap.time - snaps[n - 1].time) + grid.dx
        pairs = sorted(
            (abs(p - track.samples[-1][1]), i, j)
            for i, track in enumerate(open_tracks)
            for j, (p, r) in enumerate(found)
            if r == track.rising
        )
        taken_tracks, taken_crossings = set(), set()
        for distance, i, j in pairs:
            if distance > window or i in taken_tracks or j in taken_crossings:
                continue
            open_tracks[i].samples.append((snap.time, found[j][0]))
            taken_tracks.add(i)
            taken_crossings.add(j)

        still_open = []
        for i, track in enumerate(open_tracks):
            if i in taken_tracks:
                still_open.append(track)
            else:
                track.complete = False
                closed.append(track)
        for j, (p, r) in enumerate(found):
            if j not in taken_crossings:
                still_open.append(FrontTrack(field=field, level=level, rising=r, samples=[(snap.time, p)]))
        open_tracks = still_open

    tracks = closed + open_tracks
    for track in tracks:
        if len(track.samples) > 1:
            track.side = Side.RIGHT if track.samples[-1][1] >= track.samples[0][1] else Side.LEFT
    lost = sum(1 for t in tracks if not t.complete)
    if lost:
        logger.warning(f"{lost} of {len(tracks)} tracks at {field}={level:g} lost before the last snapshot")
    return sorted(tracks, key=lambda t: t.samples[-1][1])


def follow_back(snaps: Sequence[Snapshot], grid: Grid, field: str, level: float, rising: bool,
                position: float, c_max: float = 4.0) -> FrontTrack:
    """Track one crossing of the last snapshot backwards in time.

    Each earlier crossing is searched around the position extrapolated with
    the speed seen so far; the track ends at the first snapshot without one.
    """
    x = grid.x
    samples = [(snaps[-1].time, position)]
    velocity: Optional[float] = None
    for n in range(len(snaps) - 2, -1, -1):
        gap = snaps[n + 1].time - snaps[n].time
        last = samples[-1][1]
        if velocity is None:
            guess, reach = last, c_max * gap + 2.0 * grid.dx
        else:
            guess, reach = last - velocity * gap, 0.25 * c_max * gap + 2.0 * grid.dx
        found = [p for p, r in _crossings(x, _field(snaps[n], field), level)
                 if r == rising and abs(p - guess) <= reach]
        if not found:
            break
        p = min(found, key=lambda p: abs(p - guess))
        velocity = (last - p) / gap
        samples.append((snaps[n].time, p))
    samples.reverse()
    track = FrontTrack(field=field, level=level, rising=rising, samples=samples)
    if len(samples) > 1:
        track.side = Side.RIGHT if samples[-1][1] >= samples[0][1] else Side.LEFT
    return track


def fit_speed(track: FrontTrack, discard: float = 0.3) -> Tuple[float, float]:
    """Least-squares slope of position against snapshot time after the transient.

    The standard error comes from the residuals, so an exact line gives 0.
    """
    times, positions = track.times, track.positions
    if len(times) == 0:
        raise InsufficientDataError("empty track", {"level": track.level})
    cutoff = times[0] + discard * (times[-1] - times[0])
    keep = times >= cutoff
    if keep.sum() < MIN_SAMPLES:
        raise InsufficientDataError(
            f"only {int(keep.sum())} samples after discarding the transient",
            {"samples": len(times), "usable": int(keep.sum()), "discard": discard},
        )
    t, x = times[keep], positions[keep]
    slope, intercept = np.polyfit(t, x, deg=1)
    residuals = x - (slope * t + intercept)
    spread = float(np.sum((t - t.mean()) ** 2))
    track.c_fit = float(slope)
    track.stderr = math.sqrt(float(np.sum(residuals ** 2)) / (len(t) - 2) / spread)
    track.side = Side.RIGHT if slope >= 0 else Side.LEFT
    return track.c_fit, track.stderr


# ---------------------------------------------------------------------------
# plateaus, states and phase traces
# ---------------------------------------------------------------------------

def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0] - 1
    return list(zip(starts.tolist(), stops.tolist()))


def _slope(u: np.ndarray, w: np.ndarray, dx: float) -> np.ndarray:
    if len(u) < 2:
        return np.zeros_like(u)
    return np.maximum(np.abs(np.gradient(u, dx)), np.abs(np.gradient(w, dx)))


def extract_plateaus(snap: Snapshot, grid: Grid, grad_tol: Optional[float] = None, first_cell: int = 0,
                     merge_gap: int = 3, min_cells: int = 10) -> List[Plateau]:
    """Maximal flat intervals of u and w.

    `first_cell` is the grid index of the snapshot's first cell, so restricted
    snapshots report positions on the full grid.
    """
    u, w = snap.fields.u, snap.fields.w
    if grad_tol is None:
        grad_tol = 1e-3 * float(np.max(u)) if np.max(u) > 0 else 1e-3
    x = grid.x[first_cell:first_cell + len(u)]
    if len(u) < 2:
        return []
    slope = _slope(u, w, grid.dx)
    flat = slope < grad_tol

    merged: List[List[int]] = []
    for lo, hi in _runs(flat):
        if merged and lo - merged[-1][1] - 1 < merge_gap:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi])

    plateaus = []
    for lo, hi in merged:
        if hi - lo + 1 < min_cells:
            continue
        inside = flat[lo:hi + 1]
        plateaus.append(Plateau(
            start=float(x[lo]),
            stop=float(x[hi]),
            first_cell=first_cell + lo,
            last_cell=first_cell + hi,
            U=float(np.mean(u[lo:hi + 1])),
            W=float(np.mean(w[lo:hi + 1])),
            max_gradient=float(np.max(slope[lo:hi + 1][inside])),
        ))
    return plateaus


_STATE_CODES = (
    PlateauState.EMPTY,
    PlateauState.NON_POLARIZED,
    PlateauState.RIGHT_POLARIZED,
    PlateauState.LEFT_POLARIZED,
    PlateauState.MIXED,
)


def _cell_states(u: np.ndarray, w: np.ndarray, u0: float, tol: float) -> np.ndarray:
    """Index into _STATE_CODES per cell, by the same rules as plateau_state."""
    codes = np.full(len(u), 4, dtype=np.int8)
    codes[np.abs(w) < tol * u] = 1
    codes[w > (1.0 - tol) * u] = 2
    codes[w < -(1.0 - tol) * u] = 3
    codes[u < tol * u0] = 0
    return codes


def _flattest_core(slope: np.ndarray, lo: int, hi: int, tol: float) -> Tuple[int, int]:
    """Contiguous cells around the flattest cell of [lo, hi] whose slope stays within bounds."""
    k = lo + int(np.argmin(slope[lo:hi + 1]))
    bound = max(tol, 2.0 * float(slope[k]))
    first, last = k, k
    while first > lo and slope[first - 1] <= bound:
        first -= 1
    while last < hi and slope[last + 1] <= bound:
        last += 1
    return first, last


def extract_states(snap: Snapshot, grid: Grid, options: Optional[AnalysisOptions] = None,
                   first_cell: int = 0) -> List[Plateau]:
    """Runs of cells sharing one polarization state, each measured on its flattest part.

    Humps left behind slowly separating fronts never become flat to the
    plateau tolerance; their value is read where the slope is smallest and
    scaled by the hump height.
    """
    options = options or AnalysisOptions()
    u, w = snap.fields.u, snap.fields.w
    if len(u) < 2:
        return []
    x = grid.x[first_cell:first_cell + len(u)]
    slope = _slope(u, w, grid.dx)
    codes = _cell_states(u, w, options.u0, options.state_tol)

    bounds = np.concatenate(([0], np.nonzero(np.diff(codes))[0] + 1, [len(codes)]))
    runs: List[List[int]] = []
    for lo, stop in zip(bounds[:-1].tolist(), bounds[1:].tolist()):
        code = int(codes[lo])
        if code == 4 or stop - lo < options.min_cells:
            continue
        if runs and runs[-1][2] == code and lo - runs[-1][1] - 1 < options.min_cells:
            runs[-1][1] = stop - 1
        else:
            runs.append([lo, stop - 1, code])

    states = []
    for lo, hi, _ in runs:
        height = max(1.0, float(np.max(u[lo:hi + 1])) / options.u0)
        first, last = _flattest_core(slope, lo, hi, options.slope_tol * height)
        states.append(Plateau(
            start=float(x[first]),
            stop=float(x[last]),
            first_cell=first_cell + first,
            last_cell=first_cell + last,
            U=float(np.mean(u[first:last + 1])),
            W=float(np.mean(w[first:last + 1])),
            max_gradient=float(np.max(slope[first:last + 1])),
        ))
    return states


def phase_trace(snap: Snapshot, grid: Grid, first_cell: int = 0) -> PhaseTrace:
    """(U, W, W') per cell in spatial order; consecutive repeats collapse to one point."""
    u, w = snap.fields.u, snap.fields.w
    wp = np.gradient(w, grid.dx) if len(w) > 1 else np.zeros_like(w)
    x = grid.x[first_cell:first_cell + len(u)]
    points = np.stack([u, w, wp])
    atol = 1e-12 * max(1.0, float(np.max(np.abs(u))))
    keep = np.ones(len(u), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(points, axis=1)) > atol, axis=0)
    return PhaseTrace(x=x[keep], U=u[keep], W=w[keep], W_prime=wp[keep])


def ray_deviation(snap: Snapshot, grid: Grid, start: float, stop: float) -> float:
    """Largest U - |W| on [start, stop]; zero on the rays W = +-U."""
    x = grid.x
    inside = (x >= start) & (x <= stop)
    if not inside.any():
        return 0.0
    return float(np.max(snap.fields.u[inside] - np.abs(snap.fields.w[inside])))


# ---------------------------------------------------------------------------
# front taxonomy
# ---------------------------------------------------------------------------

def plateau_state(p: Plateau, u0: float = 1.0, tol: float = 0.02) -> PlateauState:
    if p.U < tol * u0:
        return PlateauState.EMPTY
    if abs(p.W) < tol * p.U:
        return PlateauState.NON_POLARIZED
    if p.W > (1.0 - tol) * p.U:
        return PlateauState.RIGHT_POLARIZED
    if p.W < -(1.0 - tol) * p.U:
        return PlateauState.LEFT_POLARIZED
    return PlateauState.MIXED


_MIRRORED = {
    PlateauState.RIGHT_POLARIZED: PlateauState.LEFT_POLARIZED,
    PlateauState.LEFT_POLARIZED: PlateauState.RIGHT_POLARIZED,
}


def _mirror(state: PlateauState) -> PlateauState:
    return _MIRRORED.get(state, state)


def _front_kind(behind: PlateauState, ahead: PlateauState, speed: Optional[float]) -> FrontKind:
    """Type of a front seen as right-moving; `behind` lies to its left."""
    polarized = (PlateauState.RIGHT_POLARIZED, PlateauState.LEFT_POLARIZED)
    slow = speed is not None and abs(speed) < 1.0
    if ahead == PlateauState.NON_POLARIZED and behind in polarized:
        return FrontKind.SLOW if slow else FrontKind.LEADING
    if behind == PlateauState.NON_POLARIZED and ahead in polarized:
        return FrontKind.SLOW
    if behind == PlateauState.RIGHT_POLARIZED and ahead == PlateauState.LEFT_POLARIZED:
        return FrontKind.INVERSION
    if PlateauState.EMPTY in (behind, ahead) and (behind in polarized or ahead in polarized):
        return FrontKind.DIFFUSION
    return FrontKind.OTHER


def _interface_track(snaps: Sequence[Snapshot], grid: Grid, left: Plateau, right: Plateau,
                     options: AnalysisOptions) -> Tuple[Optional[FrontTrack], float]:
    """Track of the crossing halfway between two states, fitted if possible, and its final position."""
    field = "w" if abs(right.W - left.W) >= abs(right.U - left.U) else "u"
    lo, hi = (left.W, right.W) if field == "w" else (left.U, right.U)
    center = 0.5 * (left.stop + right.start)
    if lo == hi:
        return None, center
    level = 0.5 * (lo + hi)
    rising = hi > lo

    values = _field(snaps[-1], field)
    cells = slice(left.last_cell, right.first_cell + 1)
    found = [p for p, r in _crossings(grid.x[cells], values[cells], level) if r == rising]
    if not found:
        logger.warning(f"no {field}={level:.4g} crossing between x={left.stop:.2f} and x={right.start:.2f}")
        return None, center
    # the front proper is the steepest crossing of the interface
    steepness = np.abs(np.gradient(values, grid.dx))
    position = max(found, key=lambda p: float(np.interp(p, grid.x, steepness)))

    track = follow_back(snaps, grid, field, level, rising, position, options.c_max)
    try:
        fit_speed(track, options.discard)
    except InsufficientDataError as e:
        logger.warning(f"no speed for the front near x={position:.2f}: {e}")
    return track, position


def classify_fronts(snaps: Sequence[Snapshot], grid: Grid,
                    options: Optional[AnalysisOptions] = None) -> List[ClassifiedFront]:
    """Type every interface between adjacent states of the last snapshot and fit its speed."""
    options = options or AnalysisOptions()
    states = extract_states(snaps[-1], grid, options)
    fronts = []
    for left, right in zip(states, states[1:]):
        track, position = _interface_track(snaps, grid, left, right, options)
        if track is not None and track.c_fit is not None:
            side = Side.RIGHT if track.c_fit >= 0 else Side.LEFT
        else:
            side = Side.RIGHT if position >= 0 else Side.LEFT
        if side == Side.RIGHT:
            behind, ahead = left, right
            behind_state = plateau_state(behind, options.u0, options.state_tol)
            ahead_state = plateau_state(ahead, options.u0, options.state_tol)
        else:
            behind, ahead = right, left
            behind_state = _mirror(plateau_state(behind, options.u0, options.state_tol))
            ahead_state = _mirror(plateau_state(ahead, options.u0, options.state_tol))
        speed = None if track is None else track.c_fit
        fronts.append(ClassifiedFront(
            kind=_front_kind(behind_state, ahead_state, speed),
            side=side,
            position=position,
            behind=behind,
            ahead=ahead,
            behind_state=behind_state,
            ahead_state=ahead_state,
            track=track,
        ))
    return fronts


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

def _relative_error(measured: float, expected: float) -> float:
    return abs(measured - expected) / max(abs(expected), 1e-300)


def _check_leading(front: ClassifiedFront, c: float) -> Tuple[RelationCheck, Optional[str]]:
    U1 = front.ahead.U
    U2, U3 = plateau_relations(c, U1)
    measured = front.behind.U
    if front.behind_state == PlateauState.LEFT_POLARIZED:
        return RelationCheck(
            front=front.kind, side=front.side, relation="U2 = U1 c/(c+1)", speed=c,
            expected=U2, measured=measured, relative_error=_relative_error(measured, U2),
        ), None

    err_minus, err_plus = _relative_error(measured, U3), _relative_error(measured, U2)
    if err_minus <= err_plus:
        form, expected, error, other = "c/(c-1)", U3, err_minus, err_plus
    else:
        form, expected, error, other = "c/(c+1)", U2, err_plus, err_minus
    return RelationCheck(
        front=front.kind, side=front.side, relation=f"U3 = U1 {form}", speed=c,
        expected=expected, measured=measured, relative_error=error,
        note=f"alternative form off by {other:.3e}",
    ), form


def verify_relations(fronts: Sequence[ClassifiedFront]) -> RelationReport:
    """Compare plateau values next to each fitted front with the mass-balance relations."""
    report = RelationReport()
    forms = []
    for front in fronts:
        c = front.speed
        if front.kind == FrontKind.SLOW:
            report.slow_fronts_observed = True
        if c is None:
            report.checks.append(RelationCheck(
                front=front.kind, side=front.side, relation="-", complete=False,
                note=f"no fitted speed for the front near x={front.position:.2f}",
            ))
            continue
        c = abs(c)

        if front.kind == FrontKind.LEADING:
            if c <= 1.0:
                report.checks.append(RelationCheck(
                    front=front.kind, side=front.side, relation="c > 1", speed=c, complete=False,
                    note="leading front slower than the particles",
                ))
                continue
            check, form = _check_leading(front, c)
            report.checks.append(check)
            if form is not None:
                forms.append(form)
        elif front.kind == FrontKind.INVERSION:
            if c <= 1.0:
                report.checks.append(RelationCheck(
                    front=front.kind, side=front.side, relation="c > 1", speed=c, complete=False,
                    note="inversion front slower than the particles",
                ))
                continue
            expected = inversion_relation(c, front.behind.U)
            report.checks.append(RelationCheck(
                front=front.kind, side=front.side, relation="U3 = U2 (c-1)/(c+1)", speed=c,
                expected=expected, measured=front.ahead.U,
                relative_error=_relative_error(front.ahead.U, expected),
            ))
        elif front.kind == FrontKind.DIFFUSION:
            report.checks.append(RelationCheck(
                front=front.kind, side=front.side, relation="|c| = 1", speed=c,
                expected=1.0, measured=c, relative_error=abs(c - 1.0),
            ))
        elif (front.kind == FrontKind.SLOW and front.behind_state == PlateauState.NON_POLARIZED
              and front.ahead_state == PlateauState.LEFT_POLARIZED and 0 < c < 1):
            expected = slow_plateau_relation(c, front.behind.U)
            report.checks.append(RelationCheck(
                front=front.kind, side=front.side, relation="U2 = U1 c/(c+1)", speed=c,
                expected=expected, measured=front.ahead.U,
                relative_error=_relative_error(front.ahead.U, expected),
            ))
        else:
            report.checks.append(RelationCheck(
                front=front.kind, side=front.side, relation="-", speed=c, complete=False,
                note=f"{front.behind_state.value} -> {front.ahead_state.value} has no plateau relation",
            ))

    if forms:
        report.supported_copolarized_form = max(set(forms), key=forms.count)
    return report


def stability_record(fronts: Sequence[ClassifiedFront]) -> dict:
    """Whether slow depolarization fronts showed up; presence only."""
    slow = [f for f in fronts if f.kind == FrontKind.SLOW]
    return {
        "slow_fronts_observed": bool(slow),
        "count": len(slow),
        "speeds": [f.speed for f in slow],
    }


def analyze_run(result: RunResult, options: Optional[AnalysisOptions] = None) -> AnalysisReport:
    """States, typed fronts, relation checks and ray deviation of the last snapshot."""
    options = options or AnalysisOptions(u0=result.config.initial.u0)
    grid = result.config.grid
    last = result.snapshots[-1]
    fronts = classify_fronts(result.snapshots, grid, options) if len(result.snapshots) >= MIN_SAMPLES else []
    states = extract_states(last, grid, options)

    deviation = None
    for front in fronts:
        if front.kind != FrontKind.DIFFUSION:
            continue
        lo, hi = sorted((front.behind.stop, front.ahead.start)) if front.side == Side.RIGHT \
            else sorted((front.ahead.stop, front.behind.start))
        d = ray_deviation(last, grid, lo, hi)
        deviation = d if deviation is None else max(deviation, d)
    if deviation is not None and deviation > options.ray_tol * options.u0:
        logger.warning(f"diffusion front leaves the rays W = +-U by {deviation:.3e}")

    relations = verify_relations(fronts)
    logger.info(
        f"analysis at t={last.time:g}: {len(states)} states, {len(fronts)} fronts, "
        f"co-polarized form {relations.supported_copolarized_form}"
    )
    return AnalysisReport(
        time=last.time, plateaus=states, fronts=fronts, relations=relations,
        stability=stability_record(fronts), ray_deviation=deviation,
    )
