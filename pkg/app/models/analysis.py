from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Side(str, Enum):
    LEFT = "left-moving"
    RIGHT = "right-moving"


class FrontKind(str, Enum):
    LEADING = "leading"
    INVERSION = "inversion"
    DIFFUSION = "diffusion"
    SLOW = "slow-depolarization"
    OTHER = "other"


class PlateauState(str, Enum):
    EMPTY = "empty"
    NON_POLARIZED = "non-polarized"
    RIGHT_POLARIZED = "right-polarized"
    LEFT_POLARIZED = "left-polarized"
    MIXED = "mixed"


class FrontTrack(BaseModel):
    """Positions of one level crossing followed through the snapshots."""

    field: str = "w"
    level: float
    rising: bool = Field(..., description="field - level increases with x across the crossing")
    samples: List[Tuple[float, float]] = Field(default_factory=list)
    complete: bool = True
    side: Optional[Side] = None
    c_fit: Optional[float] = None
    stderr: Optional[float] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def positions(self) -> np.ndarray:
        return np.array([x for _, x in self.samples])


class Plateau(BaseModel):
    start: float
    stop: float
    first_cell: int
    last_cell: int
    U: float
    W: float
    max_gradient: float

    @property
    def cells(self) -> int:
        return self.last_cell - self.first_cell + 1

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.stop)


class PhaseTrace(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    U: np.ndarray
    W: np.ndarray
    W_prime: np.ndarray


class ClassifiedFront(BaseModel):
    """Interface between two adjacent plateaus of the final snapshot."""

    kind: FrontKind
    side: Side
    position: float
    behind: Plateau
    ahead: Plateau
    behind_state: PlateauState
    ahead_state: PlateauState
    track: Optional[FrontTrack] = None

    @property
    def speed(self) -> Optional[float]:
        return None if self.track is None else self.track.c_fit


class RelationCheck(BaseModel):
    front: FrontKind
    side: Side
    relation: str
    speed: Optional[float] = None
    expected: Optional[float] = None
    measured: Optional[float] = None
    relative_error: Optional[float] = None
    complete: bool = True
    note: str = ""


class RelationReport(BaseModel):
    checks: List[RelationCheck] = Field(default_factory=list)
    supported_copolarized_form: str = Field(
        "undetermined", description="c/(c-1), c/(c+1) or undetermined"
    )
    slow_fronts_observed: bool = False

    @property
    def max_error(self) -> Optional[float]:
        errors = [c.relative_error for c in self.checks if c.relative_error is not None]
        return max(errors) if errors else None


class AnalysisOptions(BaseModel):
    """Thresholds used when reading fronts and plateaus off a run."""

    u0: float = Field(1.0, gt=0, description="background density; scales the tolerances below")
    grad_tol: Optional[float] = Field(None, gt=0, description="plateau slope threshold; None means 1e-3 * u0")
    merge_gap: int = Field(3, ge=0, description="flat runs separated by fewer cells are merged")
    min_cells: int = Field(10, ge=1)
    discard: float = Field(0.3, ge=0, lt=1, description="initial fraction of a track ignored by the fit")
    c_max: float = Field(4.0, gt=0, description="largest front speed the tracker follows")
    state_tol: float = Field(0.02, gt=0, lt=0.5, description="relative tolerance of the plateau taxonomy")
    ray_tol: float = Field(0.02, gt=0, description="U - |W| bound along diffusion fronts, relative to u0")

    @property
    def slope_tol(self) -> float:
        return self.grad_tol if self.grad_tol is not None else 1e-3 * self.u0


class AnalysisReport(BaseModel):
    time: float
    plateaus: List[Plateau]
    fronts: List[ClassifiedFront]
    relations: RelationReport
    stability: dict
    ray_deviation: Optional[float] = None
