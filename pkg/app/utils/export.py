"""CSV/JSON layouts of runs, tracks, plateaus and phase traces."""

from typing import Any, Dict, List, Sequence

from app.models.analysis import AnalysisReport, ClassifiedFront, PhaseTrace, Plateau
from app.models.simulation import Grid, RunResult, Snapshot
from app.storage import ResultStore

SNAPSHOT_HEADER = ("x", "u", "w", "ur", "ul")
TRACK_HEADER = ("front", "kind", "side", "field", "level", "time", "position")
PLATEAU_HEADER = ("start", "stop", "first_cell", "last_cell", "U", "W", "max_gradient")
PHASE_HEADER = ("x", "U", "W", "Wprime")


def snapshot_rows(snap: Snapshot, grid: Grid) -> List[tuple]:
    f = snap.fields
    return list(zip(grid.x.tolist(), f.u.tolist(), f.w.tolist(), f.u_r.tolist(), f.u_l.tolist()))


def write_snapshots(store: ResultStore, result: RunResult) -> List[str]:
    names = []
    for i, snap in enumerate(result.snapshots):
        name = f"snapshots/snapshot_{i:04d}.csv"
        store.write_csv(name, SNAPSHOT_HEADER, snapshot_rows(snap, result.config.grid))
        names.append(name)
    return names


def track_rows(fronts: Sequence[ClassifiedFront]) -> List[tuple]:
    rows = []
    for i, front in enumerate(fronts):
        if front.track is None:
            continue
        for time, position in front.track.samples:
            rows.append((i, front.kind.value, front.side.value, front.track.field,
                         front.track.level, time, position))
    return rows


def plateau_rows(plateaus: Sequence[Plateau]) -> List[tuple]:
    return [(p.start, p.stop, p.first_cell, p.last_cell, p.U, p.W, p.max_gradient) for p in plateaus]


def phase_rows(trace: PhaseTrace) -> List[tuple]:
    return list(zip(trace.x.tolist(), trace.U.tolist(), trace.W.tolist(), trace.W_prime.tolist()))


def report_payload(report: AnalysisReport) -> Dict[str, Any]:
    """Analysis report as JSON; tracks are summarised, their samples go to tracks.csv."""
    payload = report.model_dump(mode="json", exclude={"fronts"})
    payload["fronts"] = [
        {
            "kind": f.kind.value,
            "side": f.side.value,
            "position": f.position,
            "behind": {"U": f.behind.U, "W": f.behind.W, "state": f.behind_state.value},
            "ahead": {"U": f.ahead.U, "W": f.ahead.W, "state": f.ahead_state.value},
            "speed": f.speed,
            "stderr": None if f.track is None else f.track.stderr,
            "complete": None if f.track is None else f.track.complete,
        }
        for f in report.fronts
    ]
    payload["front_counts"] = {
        kind: sum(1 for f in report.fronts if f.kind.value == kind)
        for kind in sorted({f.kind.value for f in report.fronts})
    }
    return payload
