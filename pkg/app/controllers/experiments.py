"""Experiment orchestration: single runs, sweeps and tabulated curves written to an output directory."""

import hashlib
import json
import logging
import math
from datetime import datetime, timezone
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from app.config import settings
from app.controllers.pdesim import run
from app.controllers.twode import (
    classify_equilibrium,
    critical_speeds,
    equilibria,
    hopf_locus,
    hyperbolic_orbit,
    integrate_orbit,
    inversion_speed,
    unstable_start,
)
from app.controllers.waveanalysis import analyze_run, phase_trace
from app.models.analysis import AnalysisOptions, FrontKind
from app.models.experiment import ExperimentConfig, ExperimentKind
from app.models.params import ModelParams
from app.models.simulation import SolverConfig
from app.models.wave import OrbitEvents, WaveSpec
from app.storage import ResultStore
from app.utils.errors import ConfigurationError, WaveError
from app.utils.export import (
    PHASE_HEADER,
    PLATEAU_HEADER,
    TRACK_HEADER,
    phase_rows,
    plateau_rows,
    report_payload,
    track_rows,
    write_snapshots,
)

logger = logging.getLogger(__name__)

SWEEP_HEADER = ("alpha", "epsilon", "a", "c_fit_leading", "c_fit_trailing", "c_star_predicted",
                "c_tilde_shooting", "T", "error")
CRITICAL_HEADER = ("ag", "sqrt_ag", "c_lower", "c_upper", "error")
INVERSION_HEADER = ("a", "sqrt_a", "c_tilde_lo", "c_tilde_hi", "c_upper", "error")
BIFURCATION_HEADER = ("c", "ag", "region", "signs", "label")


# ---------------------------------------------------------------------------
# sweep points; module level so worker processes can import them
# ---------------------------------------------------------------------------

def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def sweep_point(solver: SolverConfig, options: AnalysisOptions, alpha: float, epsilon: float,
                time_fraction: float = 0.8, with_shooting: bool = False) -> Dict[str, Any]:
    """One (alpha, epsilon) row of the speed sweep."""
    row: Dict[str, Any] = {"alpha": alpha, "epsilon": epsilon, "a": alpha * epsilon}
    try:
        params = ModelParams(alpha=alpha, epsilon=epsilon, beta=solver.params.beta)
        u0 = solver.initial.u0
        ag = params.a * math.exp(-(params.beta * u0) ** 2)
        c_star = critical_speeds(ag).c_upper
        if c_star is None:
            raise ConfigurationError("no critical speed for a g >= 1", {"a": params.a, "ag": ag})
        T = min(solver.T, time_fraction * solver.grid.L / c_star)
        cfg = solver.model_copy(update={
            "params": params,
            "T": T,
            "snapshot_every": min(solver.snapshot_every, T / 10.0),
        })
        report = analyze_run(run(cfg), options)
        row.update(
            c_star_predicted=c_star,
            T=T,
            c_fit_leading=_mean([abs(f.speed) for f in report.fronts
                                 if f.kind == FrontKind.LEADING and f.speed is not None]),
            c_fit_trailing=_mean([abs(f.speed) for f in report.fronts
                                  if f.kind == FrontKind.INVERSION and f.speed is not None]),
        )
        if with_shooting:
            row["c_tilde_shooting"] = inversion_speed(params.a, params.beta, u0).midpoint
    except ValidationError as e:
        error = ConfigurationError(f"invalid sweep point: {e.errors()[0]['msg']}",
                                   {"alpha": alpha, "epsilon": epsilon})
        logger.error(f"sweep row alpha={alpha} epsilon={epsilon} rejected: {error}")
        row["error"] = error.to_record()
    except WaveError as e:
        logger.error(f"sweep row alpha={alpha} epsilon={epsilon} failed: {e}")
        row["error"] = e.to_record()
    return row


def critical_point(ag: float, samples: int = 4001) -> Dict[str, Any]:
    row: Dict[str, Any] = {"ag": ag, "sqrt_ag": math.sqrt(ag)}
    try:
        speeds = critical_speeds(ag, samples)
        row.update(c_lower=speeds.c_lower, c_upper=speeds.c_upper)
    except WaveError as e:
        row["error"] = e.to_record()
    return row


def inversion_point(a: float, beta: float, U1: float, tol: float, events: OrbitEvents) -> Dict[str, Any]:
    row: Dict[str, Any] = {"a": a, "sqrt_a": math.sqrt(a)}
    try:
        bracket = inversion_speed(a, beta, U1, tol, events)
        row.update(c_tilde_lo=bracket.c_lo, c_tilde_hi=bracket.c_hi, c_upper=bracket.c_upper)
    except WaveError as e:
        logger.error(f"inversion speed for a={a} failed: {e}")
        row["error"] = e.to_record()
    return row


def _fingerprint(fn: Callable, args: tuple) -> str:
    """Digest of a point's function and arguments; cached points are reused only on a match."""
    plain = [a.model_dump(mode="json") if isinstance(a, BaseModel) else a for a in args]
    text = json.dumps([fn.__name__, plain], sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _error_cell(row: Dict[str, Any]) -> str:
    error = row.get("error")
    return "" if not error else f"{error['error']}: {error['message']}"


class ExperimentRunner:
    """Runs one ExperimentConfig into its output directory and returns the manifest."""

    def __init__(self, config: ExperimentConfig, store: Optional[ResultStore] = None,
                 workers: Optional[int] = None):
        self.config = config
        out = config.out or f"{settings.output_dir}/{config.kind.value}"
        self.store = (store or ResultStore(out)).open()
        self.workers = workers or config.workers or settings.workers
        self.files: List[str] = []
        self.started = _now()

    def run(self) -> Dict[str, Any]:
        handlers = {
            ExperimentKind.SIMULATE: self.cmd_simulate,
            ExperimentKind.SWEEP_SPEEDS: self.cmd_sweep_speeds,
            ExperimentKind.CRITICAL_CURVE: self.cmd_critical_curve,
            ExperimentKind.INVERSION_CURVE: self.cmd_inversion_curve,
            ExperimentKind.BIFURCATION_MAP: self.cmd_bifurcation_map,
            ExperimentKind.ORBIT: self.cmd_orbit,
        }
        logger.info(f"experiment {self.config.kind.value} -> {self.store.root}")
        return handlers[self.config.kind]()

    # -- helpers ------------------------------------------------------------

    def _write_csv(self, name: str, header, rows) -> None:
        self.store.write_csv(name, header, rows)
        self.files.append(name)

    def _write_json(self, name: str, payload) -> None:
        self.store.write_json(name, payload)
        self.files.append(name)

    def _manifest(self, summary: Dict[str, Any]) -> Dict[str, Any]:
        manifest = {
            "kind": self.config.kind.value,
            "config": self.config.model_dump(mode="json"),
            "files": sorted(set(self.files)),
            "started": self.started,
            "finished": _now(),
            "summary": summary,
        }
        self.store.write_json("manifest.json", manifest)
        return manifest

    def _run_points(self, name: str, jobs: Sequence[Tuple[Callable, tuple]]) -> List[Dict[str, Any]]:
        """Evaluate independent points, reusing points/<name>/ files whose arguments match."""
        results: Dict[int, Dict[str, Any]] = {}
        pending = []
        for i, (fn, args) in enumerate(jobs):
            point = f"points/{name}/{i:05d}-{_fingerprint(fn, args)}.json"
            if self.store.exists(point):
                results[i] = self.store.read_json(point)
            else:
                pending.append((i, point, (fn, args)))
        if len(results):
            logger.info(f"{name}: reusing {len(results)} of {len(jobs)} finished points")

        def finish(i: int, point: str, row: Dict[str, Any]):
            results[i] = row
            if not row.get("error"):
                self.store.write_json(point, row)
            logger.info(f"{name}: point {i + 1}/{len(jobs)} done")

        if self.workers > 1 and len(pending) > 1:
            with Pool(processes=self.workers) as pool:
                handles = [(i, point, pool.apply_async(fn, args)) for i, point, (fn, args) in pending]
                for i, point, handle in handles:
                    finish(i, point, handle.get())
        else:
            for i, point, (fn, args) in pending:
                finish(i, point, fn(*args))
        return [results[i] for i in range(len(jobs))]

    # -- commands -----------------------------------------------------------

    def cmd_simulate(self) -> Dict[str, Any]:
        cfg = self.config.solver
        result = run(cfg)
        grid = cfg.grid
        report = analyze_run(result, self.config.analysis)

        self.files += write_snapshots(self.store, result)
        self._write_csv("mass.csv", ("time", "mass"), zip(result.times, result.mass))
        self._write_csv("tracks.csv", TRACK_HEADER, track_rows(report.fronts))
        self._write_csv("plateaus.csv", PLATEAU_HEADER, plateau_rows(report.plateaus))
        self._write_csv("phase_trace.csv", PHASE_HEADER, phase_rows(phase_trace(result.snapshots[-1], grid)))
        payload = report_payload(report)
        self._write_json("report.json", payload)

        return self._manifest({
            "dt": result.dt,
            "steps": result.steps,
            "snapshots": len(result.snapshots),
            "times": [float(t) for t in result.times],
            "mass": [float(m) for m in result.mass],
            "mass_drift": result.mass[-1] - result.mass[0],
            "min_density": result.min_density,
            "front_counts": payload["front_counts"],
            "supported_copolarized_form": report.relations.supported_copolarized_form,
            "max_relation_error": report.relations.max_error,
            "slow_fronts_observed": report.stability["slow_fronts_observed"],
        })

    def cmd_sweep_speeds(self) -> Dict[str, Any]:
        sweep = self.config.sweep
        jobs = [
            (sweep_point, (self.config.solver, self.config.analysis, alpha, epsilon,
                           sweep.time_fraction, sweep.with_shooting))
            for alpha in sweep.alpha.values()
            for epsilon in sweep.epsilons
        ]
        rows = self._run_points("sweep-speeds", jobs)
        self._write_csv("sweep_speeds.csv", SWEEP_HEADER, (
            (r["alpha"], r["epsilon"], r["a"], r.get("c_fit_leading"), r.get("c_fit_trailing"),
             r.get("c_star_predicted"), r.get("c_tilde_shooting"), r.get("T"), _error_cell(r))
            for r in rows
        ))
        return self._manifest({"rows": len(rows), "failures": sum(1 for r in rows if r.get("error"))})

    def cmd_critical_curve(self) -> Dict[str, Any]:
        crit = self.config.critical
        rows = self._run_points("critical-curve", [(critical_point, (ag, crit.samples)) for ag in crit.ag.values()])
        self._write_csv("critical_curve.csv", CRITICAL_HEADER, (
            (r["ag"], r["sqrt_ag"], r.get("c_lower"), r.get("c_upper"), _error_cell(r)) for r in rows
        ))
        return self._manifest({"rows": len(rows), "failures": sum(1 for r in rows if r.get("error"))})

    def cmd_inversion_curve(self) -> Dict[str, Any]:
        inv = self.config.inversion
        beta, U1 = self.config.params.beta, self.config.solver.initial.u0
        rows = self._run_points("inversion-curve", [
            (inversion_point, (a, beta, U1, inv.tol, inv.events)) for a in inv.a.values()
        ])
        self._write_csv("inversion_curve.csv", INVERSION_HEADER, (
            (r["a"], r["sqrt_a"], r.get("c_tilde_lo"), r.get("c_tilde_hi"), r.get("c_upper"), _error_cell(r))
            for r in rows
        ))
        return self._manifest({"rows": len(rows), "failures": sum(1 for r in rows if r.get("error"))})

    def cmd_bifurcation_map(self) -> Dict[str, Any]:
        bif = self.config.bifurcation
        rows = []
        for ag in bif.ag.values():
            for c in bif.c.values():
                if c in (-1.0, 0.0, 1.0):
                    rows.append((c, ag, "", "", "degenerate"))
                    continue
                eig = classify_equilibrium(c, ag)
                label = "imaginary-pair" if eig.is_imaginary_pair else eig.region.value
                rows.append((c, ag, eig.region.value, eig.signs, label))
        self._write_csv("bifurcation_map.csv", BIFURCATION_HEADER, rows)

        hopf = [hopf_locus(c) for c in np.linspace(0.0, 1.0, 101)[1:-1]]
        self._write_csv("hopf_curve.csv", ("c", "ag", "omega"), ((h.c, h.a, h.omega) for h in hopf))

        upper = [critical_point(ag, 801) for ag in bif.ag.values() if ag > 0]
        self._write_csv("critical_curve.csv", CRITICAL_HEADER, (
            (r["ag"], r["sqrt_ag"], r.get("c_lower"), r.get("c_upper"), _error_cell(r)) for r in upper
        ))
        labels = [r[4] for r in rows]
        return self._manifest({label: labels.count(label) for label in sorted(set(labels))})

    def cmd_orbit(self) -> Dict[str, Any]:
        orb = self.config.orbit
        spec = WaveSpec.normalized(c=orb.c, a=orb.a, U1=orb.U1, beta=orb.beta)
        start = unstable_start(spec, orb.events)
        trajectory, outcome = integrate_orbit(spec, start, orb.events)
        self._write_csv("orbit.csv", ("xi", "U", "W", "V"), (
            (float(xi), *map(float, trajectory.states[:, k])) for k, xi in enumerate(trajectory.xi)
        ))
        line = hyperbolic_orbit(start.U, start.W, orb.c, orb.beta, (0.0, orb.hyperbolic_span))
        self._write_csv("hyperbolic.csv", ("xi", "U", "W"), (
            (float(xi), float(line.states[0, k]), float(line.states[1, k])) for k, xi in enumerate(line.xi)
        ))
        self._write_json("outcome.json", {
            "outcome": outcome.model_dump(mode="json"),
            "equilibria": equilibria(spec).model_dump(),
            "start": start.model_dump(),
        })
        logger.info(f"orbit c={orb.c} a={orb.a}: {outcome.classification.value}")
        return self._manifest({"classification": outcome.classification.value, "xi": outcome.xi})
