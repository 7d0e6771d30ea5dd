import numpy as np
import pytest

from app.controllers.pdesim import run
from app.controllers.twode import critical_speeds, inversion_relation, plateau_relations
from app.controllers.waveanalysis import (
    analyze_run,
    classify_fronts,
    detect_fronts,
    extract_plateaus,
    extract_states,
    fit_speed,
    follow_back,
    phase_trace,
    plateau_state,
    stability_record,
    verify_relations,
)
from app.models.analysis import (
    AnalysisOptions,
    ClassifiedFront,
    FrontKind,
    FrontTrack,
    Plateau,
    PlateauState,
    Side,
)
from app.models.params import ModelParams
from app.models.simulation import FieldPair, Grid, InitialData, Snapshot, SolverConfig
from app.utils.errors import InsufficientDataError


@pytest.fixture
def grid():
    return Grid(L=50.0, N=2000)


def _homogeneous(grid, times=range(6)):
    f = FieldPair(u_r=np.full(grid.N, 0.5), u_l=np.full(grid.N, 0.5))
    return [Snapshot(time=float(t), fields=f) for t in times]


def _mirrored(snaps):
    return [
        Snapshot(time=s.time, fields=FieldPair.from_uw(s.fields.u[::-1].copy(), -s.fields.w[::-1]))
        for s in snaps
    ]


def _plateau(U, W):
    return Plateau(start=0.0, stop=1.0, first_cell=0, last_cell=20, U=U, W=W, max_gradient=0.0)


# -- fronts ------------------------------------------------------------------

@pytest.mark.parametrize("level", [0.2, 0.5, 0.8])
def test_translating_step_gives_one_track(grid, translating, level):
    snaps = translating(grid, 1.4, U_behind=1.0, W_behind=1.0, U_ahead=0.0)
    tracks = detect_fronts(snaps, grid, "u", level)
    assert len(tracks) == 1
    track = tracks[0]
    assert track.complete and not track.rising
    assert len(track.samples) == len(snaps)
    shift = 0.5 * np.arctanh(1.0 - 2.0 * level)
    for t, x in track.samples:
        assert x == pytest.approx(-20.0 + 1.4 * t + shift, abs=grid.dx)
    c_fit, _ = fit_speed(track)
    assert c_fit == pytest.approx(1.4, rel=1e-3)
    assert track.side == Side.RIGHT


def test_fit_speed_of_exact_line():
    track = FrontTrack(level=0.5, rising=False, samples=[(float(t), 1.4 * t) for t in range(10)])
    c_fit, stderr = fit_speed(track)
    assert c_fit == pytest.approx(1.4)
    assert stderr == pytest.approx(0.0, abs=1e-12)


def test_fit_speed_needs_four_samples_after_transient():
    track = FrontTrack(level=0.5, rising=True, samples=[(float(t), -t) for t in range(5)])
    with pytest.raises(InsufficientDataError):
        fit_speed(track)
    assert fit_speed(track, discard=0.0)[0] == pytest.approx(-1.0)


def test_detect_fronts_needs_four_snapshots(grid):
    with pytest.raises(InsufficientDataError):
        detect_fronts(_homogeneous(grid, range(3)), grid)


def test_homogeneous_run_has_no_fronts(grid):
    snaps = _homogeneous(grid)
    assert detect_fronts(snaps, grid, "w", 0.5) == []
    assert detect_fronts(snaps, grid, "u", 0.5) == []


def test_lost_track_is_flagged_incomplete(grid, translating):
    snaps = translating(grid, 1.4, U_behind=1.0, W_behind=1.0, U_ahead=0.0, times=range(6))
    flat = FieldPair(u_r=np.zeros(grid.N), u_l=np.zeros(grid.N))
    snaps.append(Snapshot(time=6.0, fields=flat))
    tracks = detect_fronts(snaps, grid, "u", 0.5)
    assert len(tracks) == 1
    assert not tracks[0].complete


def test_follow_back_recovers_a_translating_crossing(grid, translating):
    snaps = translating(grid, 1.4, U_behind=1.0, W_behind=1.0, U_ahead=0.0)
    final = -20.0 + 1.4 * snaps[-1].time
    track = follow_back(snaps, grid, "w", 0.5, False, final)
    assert len(track.samples) == len(snaps)
    assert track.samples[0][0] == 0.0
    assert track.samples[0][1] == pytest.approx(-20.0, abs=grid.dx)
    assert track.side == Side.RIGHT
    assert fit_speed(track)[0] == pytest.approx(1.4, rel=1e-3)


def test_follow_back_stops_where_the_crossing_vanishes(grid, translating):
    snaps = _homogeneous(grid, range(3)) + translating(grid, 1.4, U_behind=1.0, W_behind=1.0, U_ahead=0.0,
                                                       times=range(3, 10))
    track = follow_back(snaps, grid, "w", 0.5, False, -20.0 + 1.4 * 9)
    assert [t for t, _ in track.samples] == [float(t) for t in range(3, 10)]


# -- plateaus and phase traces -----------------------------------------------

def test_homogeneous_snapshot_is_one_plateau(grid):
    plateaus = extract_plateaus(_homogeneous(grid)[0], grid)
    assert len(plateaus) == 1
    p = plateaus[0]
    assert (p.first_cell, p.last_cell) == (0, grid.N - 1)
    assert (p.U, p.W) == pytest.approx((1.0, 0.0))


def test_homogeneous_phase_trace_is_one_point(grid):
    trace = phase_trace(_homogeneous(grid)[0], grid)
    assert len(trace.U) == 1
    assert (trace.U[0], trace.W[0], trace.W_prime[0]) == (1.0, 0.0, 0.0)


def test_plateaus_of_a_front(grid, translating):
    snap = translating(grid, 1.5, U_behind=3.0, W_behind=3.0)[-1]
    plateaus = extract_plateaus(snap, grid, grad_tol=1e-3)
    assert len(plateaus) == 2
    behind, ahead = plateaus
    assert (behind.U, behind.W) == pytest.approx((3.0, 3.0), rel=1e-3)
    assert (ahead.U, ahead.W) == pytest.approx((1.0, 0.0), abs=1e-3)
    assert behind.max_gradient < 1e-3 and ahead.max_gradient < 1e-3


def test_plateau_extraction_is_idempotent(grid, translating):
    snap = translating(grid, 1.5, U_behind=3.0, W_behind=3.0)[-1]
    for p in extract_plateaus(snap, grid, grad_tol=1e-3):
        again = extract_plateaus(snap.restrict(p.first_cell, p.last_cell + 1), grid,
                                 grad_tol=1e-3, first_cell=p.first_cell)
        assert len(again) == 1
        assert (again[0].first_cell, again[0].last_cell) == (p.first_cell, p.last_cell)
        assert again[0].U == pytest.approx(p.U)
        assert again[0].W == pytest.approx(p.W)


def test_short_flat_runs_are_not_plateaus(grid):
    x = grid.x
    u = 1.0 + 0.5 * np.sin(x)
    snap = Snapshot(time=0.0, fields=FieldPair.from_uw(u, np.zeros_like(u)))
    assert extract_plateaus(snap, grid, grad_tol=1e-3) == []


def test_phase_trace_of_restricted_snapshot_keeps_grid_positions(grid, translating):
    snap = translating(grid, 1.5, U_behind=3.0, W_behind=3.0)[-1]
    part = phase_trace(snap.restrict(300, 900), grid, first_cell=300)
    assert part.x[0] == pytest.approx(grid.x[300])
    assert np.all(part.x <= grid.x[899])
    middle = int(np.argmin(np.abs(part.W - 1.5)))
    assert part.x[middle] == pytest.approx(-20.0 + 1.5 * 16, abs=grid.dx)


def _dip_like(grid, hump_curvature=0.0):
    """NP | right hump | empty | left hump | NP, joined by smoothed steps."""
    x = grid.x
    s = [0.5 * (1.0 + np.tanh((x - x0) / 0.5)) for x0 in (-30.0, -10.0, 10.0, 30.0)]
    u = 1.0 + 2.0 * s[0] - 3.0 * s[1] + 3.0 * s[2] - 2.0 * s[3]
    w = 3.0 * s[0] - 3.0 * s[1] - 3.0 * s[2] + 3.0 * s[3]
    hump = -hump_curvature * (x + 20.0) ** 2 * (s[0] - s[1])
    return Snapshot(time=0.0, fields=FieldPair.from_uw(u + hump, w + hump))


def test_states_of_a_dip_like_profile(grid):
    states = extract_states(_dip_like(grid), grid)
    assert [plateau_state(p) for p in states] == [
        PlateauState.NON_POLARIZED,
        PlateauState.RIGHT_POLARIZED,
        PlateauState.EMPTY,
        PlateauState.LEFT_POLARIZED,
        PlateauState.NON_POLARIZED,
    ]
    assert [(p.U, p.W) for p in states[1:4]] == [
        pytest.approx((3.0, 3.0), abs=1e-3),
        pytest.approx((0.0, 0.0), abs=1e-3),
        pytest.approx((3.0, -3.0), abs=1e-3),
    ]


def test_curved_hump_is_read_at_its_flattest_part(grid):
    snap = _dip_like(grid, hump_curvature=0.002)
    hump = extract_states(snap, grid)[1]
    assert plateau_state(hump) == PlateauState.RIGHT_POLARIZED
    assert hump.start < -20.0 < hump.stop
    assert hump.stop - hump.start < 2.0
    assert (hump.U, hump.W) == pytest.approx((3.0, 3.0), abs=1e-2)


def test_plateau_states():
    assert plateau_state(_plateau(0.01, 0.0)) == PlateauState.EMPTY
    assert plateau_state(_plateau(1.0, 0.001)) == PlateauState.NON_POLARIZED
    assert plateau_state(_plateau(2.0, 1.99)) == PlateauState.RIGHT_POLARIZED
    assert plateau_state(_plateau(2.0, -1.99)) == PlateauState.LEFT_POLARIZED
    assert plateau_state(_plateau(2.0, 1.0)) == PlateauState.MIXED


# -- taxonomy and relations --------------------------------------------------

def test_classify_synthetic_leading_front(grid, translating):
    snaps = translating(grid, 1.5, U_behind=3.0, W_behind=3.0)
    fronts = classify_fronts(snaps, grid, AnalysisOptions())
    assert len(fronts) == 1
    front = fronts[0]
    assert front.kind == FrontKind.LEADING
    assert front.side == Side.RIGHT
    assert front.behind_state == PlateauState.RIGHT_POLARIZED
    assert front.speed == pytest.approx(1.5, rel=1e-3)

    report = verify_relations(fronts)
    assert report.supported_copolarized_form == "c/(c-1)"
    assert report.checks[0].relative_error < 1e-3


def test_mirrored_front_is_classified_the_same_way(grid, translating):
    snaps = translating(grid, 1.5, U_behind=3.0, W_behind=3.0)
    right = classify_fronts(snaps, grid)[0]
    left = classify_fronts(_mirrored(snaps), grid)[0]
    assert left.side == Side.LEFT
    assert left.kind == FrontKind.LEADING
    assert left.behind_state == PlateauState.RIGHT_POLARIZED
    assert abs(left.speed) == pytest.approx(abs(right.speed), rel=1e-3)


def test_relations_of_constructed_plateaus():
    U2, U3 = plateau_relations(2.0, 1.0)
    track = FrontTrack(level=0.5, rising=False, c_fit=2.0)
    ahead = _plateau(1.0, 0.0)
    fronts = [
        ClassifiedFront(kind=FrontKind.LEADING, side=Side.RIGHT, position=10.0, behind=_plateau(U2, -U2),
                        ahead=ahead, behind_state=PlateauState.LEFT_POLARIZED,
                        ahead_state=PlateauState.NON_POLARIZED, track=track),
        ClassifiedFront(kind=FrontKind.LEADING, side=Side.RIGHT, position=20.0, behind=_plateau(U3, U3),
                        ahead=ahead, behind_state=PlateauState.RIGHT_POLARIZED,
                        ahead_state=PlateauState.NON_POLARIZED, track=track),
        ClassifiedFront(kind=FrontKind.INVERSION, side=Side.RIGHT, position=5.0, behind=_plateau(U3, U3),
                        ahead=_plateau(inversion_relation(2.0, U3), -inversion_relation(2.0, U3)),
                        behind_state=PlateauState.RIGHT_POLARIZED,
                        ahead_state=PlateauState.LEFT_POLARIZED, track=track),
    ]
    report = verify_relations(fronts)
    assert len(report.checks) == 3
    assert report.max_error == pytest.approx(0.0, abs=1e-15)
    assert report.supported_copolarized_form == "c/(c-1)"
    assert not report.slow_fronts_observed


def test_unmatched_front_is_reported_incomplete():
    front = ClassifiedFront(kind=FrontKind.INVERSION, side=Side.LEFT, position=-3.0,
                            behind=_plateau(2.0, -2.0), ahead=_plateau(1.0, 1.0),
                            behind_state=PlateauState.RIGHT_POLARIZED,
                            ahead_state=PlateauState.LEFT_POLARIZED)
    report = verify_relations([front])
    assert len(report.checks) == 1
    assert not report.checks[0].complete
    assert report.supported_copolarized_form == "undetermined"


def test_stability_record_counts_slow_fronts():
    slow = ClassifiedFront(kind=FrontKind.SLOW, side=Side.RIGHT, position=1.0,
                           behind=_plateau(1.0, 0.0), ahead=_plateau(0.4, -0.4),
                           behind_state=PlateauState.NON_POLARIZED,
                           ahead_state=PlateauState.LEFT_POLARIZED,
                           track=FrontTrack(level=0.0, rising=False, c_fit=0.5))
    record = stability_record([slow])
    assert record == {"slow_fronts_observed": True, "count": 1, "speeds": [0.5]}
    assert stability_record([])["slow_fronts_observed"] is False
    report = verify_relations([slow])
    assert report.slow_fronts_observed
    assert report.checks[0].expected == pytest.approx(1.0 / 3.0)


# -- reference runs ----------------------------------------------------------

def _reference(kind, a=0.05):
    # stop before the leading fronts reach the outflow zone
    T = min(120.0, 0.9 * 200.0 / critical_speeds(a).c_upper)
    cfg = SolverConfig(params=ModelParams.from_diffusion(a), T=T, initial=InitialData(kind=kind))
    return analyze_run(run(cfg), AnalysisOptions(u0=1.0))


@pytest.fixture(scope="module")
def dip_report():
    return _reference("dip")


@pytest.fixture(scope="module")
def bump_report():
    return _reference("bump")


def _speeds(report, kind):
    return [f.speed for f in report.fronts if f.kind == kind and f.speed is not None]


@pytest.mark.slow
def test_dip_run_morphology(dip_report):
    kinds = [f.kind for f in dip_report.fronts]
    assert kinds.count(FrontKind.LEADING) == 2
    assert kinds.count(FrontKind.INVERSION) == 2
    assert kinds.count(FrontKind.DIFFUSION) == 2
    assert len(dip_report.plateaus) == 7
    center = min(dip_report.plateaus, key=lambda p: abs(p.center))
    assert center.U < 0.02
    assert dip_report.ray_deviation is not None and dip_report.ray_deviation < 0.02
    # the dip leads with counter-polarized humps, which do not arbitrate the co-polarized form
    assert dip_report.relations.supported_copolarized_form == "undetermined"


@pytest.mark.slow
def test_dip_run_relations(dip_report):
    checks = {(c.front, c.side): c for c in dip_report.relations.checks}
    for side in Side:
        assert checks[(FrontKind.LEADING, side)].relative_error < 0.01
        assert checks[(FrontKind.INVERSION, side)].relative_error < 0.02
        assert checks[(FrontKind.DIFFUSION, side)].relative_error < 0.03
    leading = _speeds(dip_report, FrontKind.LEADING)
    assert abs(leading[0]) == pytest.approx(abs(leading[1]), rel=1e-3)
    trailing = [abs(c) for c in _speeds(dip_report, FrontKind.INVERSION)]
    assert all(1.0 < c < abs(leading[0]) for c in trailing)


@pytest.mark.slow
def test_bump_run_morphology(bump_report):
    kinds = [f.kind for f in bump_report.fronts]
    assert kinds.count(FrontKind.LEADING) == 2
    assert kinds.count(FrontKind.DIFFUSION) == 2
    assert FrontKind.INVERSION not in kinds
    assert bump_report.relations.supported_copolarized_form == "c/(c-1)"
    behind = [f.behind_state for f in bump_report.fronts if f.kind == FrontKind.LEADING]
    assert behind == [PlateauState.RIGHT_POLARIZED] * 2


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.05, 0.1, 0.2])
def test_leading_front_selects_critical_speed(a):
    report = _reference("dip", a)
    c_star = critical_speeds(a).c_upper
    leading = _speeds(report, FrontKind.LEADING)
    assert len(leading) == 2
    for c in leading:
        assert abs(c) == pytest.approx(c_star, rel=0.02)
