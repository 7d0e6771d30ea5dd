"""Method-of-lines solver for the rescaled system in characteristic variables.

    d_t u_r + d_x u_r = a d_xx u_r + f0(u, w) / 2
    d_t u_l - d_x u_l = a d_xx u_l - f0(u, w) / 2

First-order upwind transport at unit speed, central diffusion and the
alignment reaction evaluated at the old state, advanced by forward Euler.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from app.controllers.model import alignment_field
from app.models.simulation import (
    Boundary,
    FieldPair,
    Grid,
    InitialData,
    InitialKind,
    RunResult,
    Snapshot,
    SolverConfig,
)
from app.utils.errors import (
    BoundaryApproachError,
    ConfigurationError,
    NonPositiveDensityError,
    SolverInstabilityError,
)

logger = logging.getLogger(__name__)

# explicit scheme keeps u_r, u_l >= 0 for safety factors up to this value
POSITIVITY_SAFETY = 0.5


def make_initial(kind: InitialKind, u0: float, A: float, sigma: float, grid: Grid,
                 noise: float = 0.0, seed: Optional[int] = None) -> FieldPair:
    """Homogeneous state u0 with a Gaussian dip or bump, non-polarized everywhere."""
    kind = InitialKind(kind)
    if not u0 > 0:
        raise NonPositiveDensityError("background density must be positive", {"u0": u0})
    if kind == InitialKind.DIP and A >= u0:
        raise NonPositiveDensityError(
            f"dip amplitude {A} would empty the domain (u0={u0})", {"A": A, "u0": u0}
        )
    x = grid.x
    profile = A * np.exp(-x ** 2 / (2.0 * sigma ** 2))
    if noise > 0:
        # noise rides on the perturbation only; the far field stays exactly u0
        rng = np.random.default_rng(seed)
        profile = profile * (1.0 + noise * rng.uniform(-1.0, 1.0, size=profile.shape))
    u = u0 - profile if kind == InitialKind.DIP else u0 + profile
    return FieldPair(u_r=0.5 * u, u_l=0.5 * u)


def initial_from_config(data: InitialData, grid: Grid, seed: Optional[int] = None) -> FieldPair:
    return make_initial(data.kind, data.u0, data.amplitude, data.sigma, grid, data.noise, seed)


def cfl_dt(dx: float, a: float, safety: float = 1.0) -> float:
    """safety * min(dx, dx^2 / (2a)); unit advection speed."""
    if not dx > 0:
        raise ConfigurationError("cell size must be positive", {"dx": dx})
    if a < 0:
        raise ConfigurationError("diffusion must be non-negative", {"a": a})
    bound = dx if a == 0 else min(dx, dx * dx / (2.0 * a))
    return safety * bound


def resolve_dt(cfg: SolverConfig) -> float:
    """Time step of a run; a user-given dt must satisfy the CFL bound."""
    limit = cfl_dt(cfg.grid.dx, cfg.params.a, 1.0)
    if cfg.dt is None:
        if cfg.safety > POSITIVITY_SAFETY:
            logger.warning(f"CFL safety {cfg.safety} exceeds {POSITIVITY_SAFETY}; positivity is not guaranteed")
        return cfl_dt(cfg.grid.dx, cfg.params.a, cfg.safety)
    if cfg.dt > limit * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt={cfg.dt} violates the CFL bound {limit}",
            {"dt": cfg.dt, "cfl_dt": limit, "dx": cfg.grid.dx, "a": cfg.params.a},
        )
    return cfg.dt


def _padded(values: np.ndarray, boundary: Boundary) -> np.ndarray:
    mode = "wrap" if boundary == Boundary.PERIODIC else "edge"
    return np.pad(values, 1, mode=mode)


def effective_diffusion(cfg: SolverConfig, dt: float) -> float:
    """Diffusion coefficient used by the stencil.

    Upwind transport with forward Euler diffuses by (dx / 2)(1 - dt / dx) on its
    own; with upwind_correction that amount is taken off the physical a.
    """
    a = cfg.params.a
    if not cfg.upwind_correction:
        return a
    numerical = 0.5 * cfg.grid.dx * (1.0 - dt / cfg.grid.dx)
    if numerical > a:
        raise ConfigurationError(
            f"upwind diffusion {numerical:.3e} exceeds a={a}; refine the grid or disable upwind_correction",
            {"a": a, "numerical_diffusion": numerical, "dx": cfg.grid.dx, "dt": dt},
        )
    return a - numerical


def _advance(f: FieldPair, dt: float, cfg: SolverConfig, a_eff: Optional[float] = None) -> FieldPair:
    dx = cfg.grid.dx
    nu = dt / dx
    if a_eff is None:
        a_eff = effective_diffusion(cfg, dt)
    diff = a_eff * dt / (dx * dx)
    ur = _padded(f.u_r, cfg.boundary)
    ul = _padded(f.u_l, cfg.boundary)

    new_r = f.u_r - nu * (ur[1:-1] - ur[:-2]) + diff * (ur[2:] - 2.0 * ur[1:-1] + ur[:-2])
    new_l = f.u_l - nu * (ul[1:-1] - ul[2:]) + diff * (ul[:-2] - 2.0 * ul[1:-1] + ul[2:])

    if cfg.reaction:
        half_rate = 0.5 * dt * alignment_field(f.u, f.w, cfg.params.beta)
        new_r = new_r + half_rate
        new_l = new_l - half_rate
    return FieldPair.model_construct(u_r=new_r, u_l=new_l)


def step(f: FieldPair, cfg: SolverConfig) -> FieldPair:
    """One forward-Euler step; the CFL bound is checked before stepping."""
    return _advance(f, resolve_dt(cfg), cfg)


def total_mass(f: FieldPair, grid: Grid) -> float:
    return float(np.sum(f.u_r + f.u_l) * grid.dx)


def _boundary_excursion(f: FieldPair, reference: FieldPair, cells: int, level: float):
    """Side ('left'/'right') and cell of a front inside the boundary zone, or None.

    A front sits where |u - u_ref| + |w - w_ref| crosses `level`, half the jump
    between the far-field state and the state behind the front; the small
    exponential precursor ahead of a pulled front stays below it.
    """
    n = len(f.u_r)
    cells = min(cells, n // 2)
    deviation = np.abs(f.u - reference.u) + np.abs(f.w - reference.w)
    beyond = np.nonzero(deviation >= level)[0]
    if len(beyond) == 0:
        return None
    if beyond[0] < cells:
        return "left", int(beyond[0])
    if beyond[-1] >= n - cells:
        return "right", int(beyond[-1])
    return None


def run(cfg: SolverConfig, initial: Optional[FieldPair] = None) -> RunResult:
    """Step from the initial data to T, keeping snapshots at the configured cadence."""
    if initial is None:
        initial = initial_from_config(cfg.initial, cfg.grid, cfg.seed)
    dt = resolve_dt(cfg)
    steps = int(math.ceil(cfg.T / dt - 1e-9))
    snapshot_stride = max(1, int(round(cfg.snapshot_every / dt)))
    check_stride = max(1, int(round(1.0 / dt)))
    tol_pos = cfg.positivity_tol * float(np.max(initial.u))
    margin_cells = int(math.ceil(cfg.boundary_margin * cfg.front_width_cells))
    level = cfg.front_level * float(np.max(initial.u))

    logger.info(
        f"run a={cfg.params.a} beta={cfg.params.beta} N={cfg.grid.N} L={cfg.grid.L} "
        f"dt={dt:.3e} steps={steps} boundary={cfg.boundary.value}"
    )

    a_eff = effective_diffusion(cfg, dt)
    f = initial.copy()
    snapshots: List[Snapshot] = [Snapshot(time=0.0, fields=f.copy())]
    mass = [total_mass(f, cfg.grid)]
    min_density = float(min(f.u_r.min(), f.u_l.min()))

    for n in range(1, steps + 1):
        f = _advance(f, dt, cfg, a_eff)
        time = n * dt

        low = float(min(f.u_r.min(), f.u_l.min()))
        min_density = min(min_density, low)
        if low < -tol_pos:
            field = f.u_r if f.u_r.min() <= f.u_l.min() else f.u_l
            cell = int(np.argmin(field))
            raise SolverInstabilityError(
                f"positivity lost at cell {cell}, t={time:.6g}",
                {"cell": cell, "time": time, "value": low, "tol_pos": tol_pos},
            )

        if cfg.boundary == Boundary.OUTFLOW and n % check_stride == 0:
            hit = _boundary_excursion(f, initial, margin_cells, level)
            if hit is not None:
                side, cell = hit
                raise BoundaryApproachError(
                    f"front reached the {side} boundary zone at t={time:.6g}",
                    {"side": side, "cell": cell, "time": time, "margin_cells": margin_cells,
                     "snapshots": len(snapshots), "mass": mass[-1]},
                )

        if n % snapshot_stride == 0 or n == steps:
            snapshots.append(Snapshot(time=time, fields=f.copy()))
            mass.append(total_mass(f, cfg.grid))

    logger.info(f"run finished: {len(snapshots)} snapshots, mass drift {mass[-1] - mass[0]:.3e}")
    return RunResult(
        config=cfg, dt=dt, steps=steps, snapshots=snapshots, mass=mass, min_density=min_density,
    )
