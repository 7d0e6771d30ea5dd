from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class FullState(BaseModel):
    """Point (U, W, Z, V) of the first-order traveling-wave system; Z = U', V = W'."""

    model_config = ConfigDict(frozen=True)

    U: float = Field(..., gt=0)
    W: float
    Z: float = 0.0
    V: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.U, self.W, self.Z, self.V])


class ReducedState(BaseModel):
    """Point (U, W, V) on an invariant hyperplane aZ + cU - W = C1."""

    model_config = ConfigDict(frozen=True)

    U: float = Field(..., gt=0)
    W: float
    V: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.U, self.W, self.V])

    @classmethod
    def from_array(cls, y) -> "ReducedState":
        return cls(U=float(y[0]), W=float(y[1]), V=float(y[2]))


class WaveSpec(BaseModel):
    """Wave speed, rescaled diffusion and the hyperplane constant C1 = c U1."""

    model_config = ConfigDict(frozen=True)

    c: float
    a: float
    C1: float
    beta: float = Field(0.0, ge=0.0)

    @classmethod
    def normalized(cls, c: float, a: float, U1: float = 1.0, beta: float = 0.0) -> "WaveSpec":
        """Spec in the gauge where the non-polarized state sits at U = U1."""
        return cls(c=c, a=a, C1=c * U1, beta=beta)

    @property
    def U1(self) -> float:
        return self.C1 / self.c


class RootRegion(str, Enum):
    ALL_REAL = "all-real"
    COMPLEX_PAIR = "complex-pair"


class CubicSpec(BaseModel):
    """Monic cubic mu^3 + b2 mu^2 + b1 mu + b0 in the scaled eigenvalue mu = a lambda."""

    model_config = ConfigDict(frozen=True)

    c: float
    a: float
    f_U: float
    f_W: float
    b2: float
    b1: float
    b0: float

    @property
    def coefficients(self) -> Tuple[float, float, float, float]:
        return (1.0, self.b2, self.b1, self.b0)

    def evaluate(self, mu):
        return ((mu + self.b2) * mu + self.b1) * mu + self.b0

    def factored(self, mu):
        """The same polynomial in the unexpanded form of the characteristic equation."""
        return (
            mu * (mu + self.c) ** 2
            + (self.a * self.f_W - 1.0) * (mu + self.c)
            + self.c
            + self.a * self.f_U
        )

    @property
    def discriminant(self) -> float:
        b, c, d = self.b2, self.b1, self.b0
        return 18 * b * c * d - 4 * b ** 3 * d + b * b * c * c - 4 * c ** 3 - 27 * d * d


class EigenSet(BaseModel):
    """Roots of a characteristic cubic with their region label and real-part signs."""

    model_config = ConfigDict(frozen=True)

    roots: List[complex]
    region: RootRegion
    signs: str = Field(..., description="signs of real parts, complex pairs in parentheses")
    residual: float = 0.0

    @property
    def real_parts(self) -> List[float]:
        return [r.real for r in self.roots]

    @property
    def is_imaginary_pair(self) -> bool:
        return "(00)" in self.signs


class Connection(str, Enum):
    """Heteroclinic connection cases (from-state -> to-state)."""

    CASE_I = "i"      # W=0  -> W=U,  c < -1
    CASE_II = "ii"    # W=U  -> W=0,  -1 < c < 0
    CASE_III = "iii"  # W=0  -> W=-U, 0 < c < 1
    CASE_IV = "iv"    # W=-U -> W=0,  c > 1


class ConnectionInfo(BaseModel):
    case: Connection
    source: str
    target: str
    fast: bool


class CriticalSpeeds(BaseModel):
    ag: float
    c_lower: Optional[float] = Field(None, description="c_* in (0, 1); None if it does not exist")
    c_upper: float = Field(..., description="c^* > 1")


class HopfPoint(BaseModel):
    c: float
    a: float
    omega: float
    residual: float


class OrbitClass(str, Enum):
    SPIRAL_IN = "SpiralIn"
    MONOTONE_IN = "MonotoneIn"
    HIT_OPPOSITE = "HitOpposite"
    ESCAPE = "Escape"
    # integration ran out of xi without any event; not one of the four outcomes
    INCONCLUSIVE = "Inconclusive"

    @property
    def returned(self) -> bool:
        return self in (OrbitClass.SPIRAL_IN, OrbitClass.MONOTONE_IN)


class OrbitEvents(BaseModel):
    """Event radii and integrator controls for orbit integration."""

    capture_factor: float = Field(1e-3, gt=0, description="r_cap = capture_factor * U1")
    escape_factor: float = Field(1e3, gt=1, description="R_esc = escape_factor * max(U1, U2, U3)")
    half_space_floor: float = Field(1e-9, gt=0, description="U below floor * U1 counts as escape")
    terminal_on_opposite: bool = True
    max_xi: float = Field(500.0, gt=0)
    rtol: float = 1e-9
    atol: float = 1e-12
    start_offset: float = Field(1e-6, gt=0, description="relative offset along the unstable eigenvector")


class OrbitOutcome(BaseModel):
    classification: OrbitClass
    terminal: ReducedState
    xi: float
    visited_opposite: bool = False


class Trajectory(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    xi: np.ndarray
    states: np.ndarray  # shape (3, n): rows U, W, V


class Equilibria(BaseModel):
    U1: float
    U2: Optional[float] = None
    U3: Optional[float] = None


class InversionBracket(BaseModel):
    a: float
    beta: float
    U1: float
    c_lo: float
    c_hi: float
    width: float
    outcome_lo: OrbitClass
    outcome_hi: OrbitClass
    c_upper: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.c_lo + self.c_hi)

    @model_validator(mode="after")
    def _ordered(self):
        if self.c_lo > self.c_hi:
            raise ValueError("bracket endpoints out of order")
        return self
