from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.analysis import AnalysisOptions
from app.models.params import ModelParams
from app.models.simulation import SolverConfig
from app.models.wave import OrbitEvents


class ExperimentKind(str, Enum):
    SIMULATE = "simulate"
    SWEEP_SPEEDS = "sweep-speeds"
    CRITICAL_CURVE = "critical-curve"
    INVERSION_CURVE = "inversion-curve"
    ORBIT = "orbit"
    BIFURCATION_MAP = "bifurcation-map"


class Range(BaseModel):
    """num points from start to stop, linear or logarithmic."""

    start: float
    stop: float
    num: int = Field(..., ge=1)
    log: bool = False

    @model_validator(mode="after")
    def _check(self):
        if self.stop < self.start:
            raise ValueError("range stop must not be below start")
        if self.log and self.start <= 0:
            raise ValueError("logarithmic ranges need start > 0")
        return self

    def values(self) -> List[float]:
        if self.num == 1:
            return [self.start]
        space = np.geomspace if self.log else np.linspace
        return [float(v) for v in space(self.start, self.stop, self.num)]


class SweepSpeedsConfig(BaseModel):
    alpha: Range = Field(default_factory=lambda: Range(start=0.5, stop=2.0, num=4))
    epsilons: List[float] = Field(default_factory=lambda: [0.05, 0.1])
    time_fraction: float = Field(0.8, gt=0, le=1, description="stop a row before its leading front covers this share of L")
    with_shooting: bool = Field(False, description="add the shooting bracket midpoint to every row")

    @field_validator("alpha")
    @classmethod
    def _positive_alpha(cls, value: Range) -> Range:
        if value.start <= 0:
            raise ValueError("alpha values must be positive")
        return value

    @field_validator("epsilons")
    @classmethod
    def _non_empty(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("at least one epsilon is required")
        if any(v <= 0 for v in values):
            raise ValueError("epsilons must be positive")
        return values


class CriticalCurveConfig(BaseModel):
    ag: Range = Field(default_factory=lambda: Range(start=1e-4, stop=1.0, num=40, log=True))
    samples: int = Field(4001, ge=101)


class InversionCurveConfig(BaseModel):
    a: Range = Field(default_factory=lambda: Range(start=0.02, stop=0.4, num=12, log=True))
    tol: float = Field(1e-7, gt=0)
    events: OrbitEvents = Field(default_factory=OrbitEvents)


class BifurcationMapConfig(BaseModel):
    c: Range = Field(default_factory=lambda: Range(start=-3.0, stop=3.0, num=121))
    ag: Range = Field(default_factory=lambda: Range(start=0.0, stop=2.0, num=101))

    @model_validator(mode="after")
    def _resolution(self):
        if self.c.num < 50 or self.ag.num < 50:
            raise ValueError("bifurcation maps need at least 50 x 50 points")
        return self


class OrbitConfig(BaseModel):
    c: float = 1.5
    a: float = Field(0.1, gt=0)
    U1: float = Field(1.0, gt=0)
    beta: float = Field(0.0, ge=0)
    events: OrbitEvents = Field(default_factory=lambda: OrbitEvents(terminal_on_opposite=False))
    hyperbolic_span: float = Field(20.0, gt=0, description="xi extent of the hyperbolic-limit comparison line")


class ExperimentConfig(BaseModel):
    """One experiment; `params` and `seed` fill the copies inside `solver`, and setting both to different values is an error."""

    kind: ExperimentKind = ExperimentKind.SIMULATE
    params: ModelParams = Field(default_factory=ModelParams)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    analysis: AnalysisOptions = Field(default_factory=AnalysisOptions)
    sweep: SweepSpeedsConfig = Field(default_factory=SweepSpeedsConfig)
    critical: CriticalCurveConfig = Field(default_factory=CriticalCurveConfig)
    inversion: InversionCurveConfig = Field(default_factory=InversionCurveConfig)
    bifurcation: BifurcationMapConfig = Field(default_factory=BifurcationMapConfig)
    orbit: OrbitConfig = Field(default_factory=OrbitConfig)
    out: Optional[str] = Field(None, description="output directory; None uses WAVES_OUTPUT_DIR/<kind>")
    seed: Optional[int] = None
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _resolve(self):
        update = {}
        for name in ("params", "seed"):
            inner = getattr(self.solver, name)
            if name not in self.solver.model_fields_set:
                update[name] = getattr(self, name)
            elif name not in self.model_fields_set:
                setattr(self, name, inner)
            elif getattr(self, name) != inner:
                raise ValueError(f"solver.{name} conflicts with {name}; set only one of them")
        self.solver = self.solver.model_copy(update=update)
        self.analysis = self.analysis.model_copy(update={"u0": self.solver.initial.u0})
        return self
