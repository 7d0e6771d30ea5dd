from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app.models.params import ModelParams


class Grid(BaseModel):
    """Uniform cell-centred grid on [-L, L]."""

    model_config = ConfigDict(frozen=True)

    L: float = Field(200.0, gt=0)
    N: int = Field(8000, ge=16)

    @computed_field
    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.dx


class InitialKind(str, Enum):
    DIP = "dip"
    BUMP = "bump"


class Boundary(str, Enum):
    OUTFLOW = "outflow"
    PERIODIC = "periodic"


class FieldPair(BaseModel):
    """Right- and left-mover densities per cell; u and w are derived."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    u_r: np.ndarray
    u_l: np.ndarray

    @model_validator(mode="after")
    def _same_shape(self):
        if self.u_r.shape != self.u_l.shape:
            raise ValueError("u_r and u_l must have the same shape")
        return self

    @classmethod
    def from_uw(cls, u: np.ndarray, w: np.ndarray) -> "FieldPair":
        return cls(u_r=0.5 * (u + w), u_l=0.5 * (u - w))

    @property
    def u(self) -> np.ndarray:
        return self.u_r + self.u_l

    @property
    def w(self) -> np.ndarray:
        return self.u_r - self.u_l

    def copy(self) -> "FieldPair":
        return FieldPair.model_construct(u_r=self.u_r.copy(), u_l=self.u_l.copy())


class InitialData(BaseModel):
    kind: InitialKind = InitialKind.DIP
    u0: float = Field(1.0, gt=0)
    amplitude: float = Field(0.5, ge=0)
    sigma: float = Field(2.0, gt=0)
    noise: float = Field(0.0, ge=0, description="relative amplitude of seeded noise on the perturbation")


class SolverConfig(BaseModel):
    """Everything a single PDE run needs."""

    params: ModelParams = Field(default_factory=ModelParams)
    grid: Grid = Field(default_factory=Grid)
    dt: Optional[float] = Field(None, gt=0, description="time step; None derives it from cfl_dt")
    safety: float = Field(0.5, gt=0, le=1)
    T: float = Field(120.0, gt=0)
    snapshot_every: float = Field(4.0, gt=0, description="snapshot cadence in time units")
    boundary: Boundary = Boundary.OUTFLOW
    reaction: bool = True
    upwind_correction: bool = Field(True, description="subtract the upwind numerical diffusion from a")
    front_width_cells: int = Field(10, ge=1)
    boundary_margin: float = Field(5.0, gt=0, description="abort if a front is within margin * front width")
    front_level: float = Field(
        0.5, gt=0, description="deviation from the initial boundary state, relative to max u, that marks a front"
    )
    positivity_tol: float = Field(1e-12, gt=0, description="tol_pos relative to the max initial density")
    initial: InitialData = Field(default_factory=InitialData)
    seed: Optional[int] = None


class Snapshot(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    time: float
    fields: FieldPair

    def restrict(self, lo: int, hi: int) -> "Snapshot":
        """The snapshot on cells lo..hi-1."""
        return Snapshot(
            time=self.time,
            fields=FieldPair(u_r=self.fields.u_r[lo:hi].copy(), u_l=self.fields.u_l[lo:hi].copy()),
        )


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: SolverConfig
    dt: float
    steps: int
    snapshots: List[Snapshot]
    mass: List[float]
    min_density: float
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def times(self) -> List[float]:
        return [s.time for s in self.snapshots]
