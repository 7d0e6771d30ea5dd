from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.wave import OrbitEvents


class AlignmentRequest(BaseModel):
    u: float
    w: float
    beta: float = Field(0.0, ge=0)


class AlignmentResponse(BaseModel):
    rate: float
    f_U: float
    f_W: float


class ClassifyRequest(BaseModel):
    c: float
    ag: float = Field(..., ge=0, description="a * exp(-beta^2 U^2)")


class OrbitRequest(BaseModel):
    c: float
    a: float = Field(..., gt=0)
    U1: float = Field(1.0, gt=0)
    beta: float = Field(0.0, ge=0)
    events: OrbitEvents = Field(default_factory=OrbitEvents)
    max_points: int = Field(2000, ge=2, description="trajectory is thinned to at most this many points")


class OrbitResponse(BaseModel):
    classification: str
    xi_end: float
    visited_opposite: bool
    xi: List[float]
    U: List[float]
    W: List[float]
    V: List[float]


class PlateauResponse(BaseModel):
    c: float
    U1: float
    U2: float
    U3: Optional[float] = None
