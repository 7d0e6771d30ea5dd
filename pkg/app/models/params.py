import math

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class ModelParams(BaseModel):
    """Parameters of the rescaled alignment-advection-diffusion system.

    Only the product a = alpha * epsilon enters the rescaled equations; it is
    always recomputed from alpha and epsilon and never stored on its own.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(1.0, ge=0.0, description="alignment strength")
    epsilon: float = Field(0.05, ge=0.0, description="diffusion coefficient")
    beta: float = Field(0.0, ge=0.0, description="crowding parameter")

    @field_validator("alpha", "epsilon", "beta")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("model parameters must be finite")
        return value

    @computed_field
    @property
    def a(self) -> float:
        return self.alpha * self.epsilon

    @classmethod
    def from_diffusion(cls, a: float, beta: float = 0.0) -> "ModelParams":
        """Parameters with alpha = 1, so that epsilon carries the whole product."""
        return cls(alpha=1.0, epsilon=a, beta=beta)

    def to_rescaled(self, t: float, x: float):
        """Physical (t, x) to rescaled coordinates (alpha t, alpha x)."""
        return self.alpha * t, self.alpha * x

    def to_physical(self, t: float, x: float):
        if self.alpha == 0:
            raise ValueError("alpha = 0 has no physical rescaling")
        return t / self.alpha, x / self.alpha


class PhysState(BaseModel):
    """A (u, w) state; physical states satisfy |w| <= u."""

    model_config = ConfigDict(frozen=True)

    u: float
    w: float

    @model_validator(mode="after")
    def _check_invariant_domain(self):
        if self.u <= 0:
            raise ValueError("density u must be positive")
        if abs(self.w) > self.u * (1.0 + 1e-12):
            raise ValueError("polarization must satisfy |w| <= u")
        return self

    @property
    def u_right(self) -> float:
        return 0.5 * (self.u + self.w)

    @property
    def u_left(self) -> float:
        return 0.5 * (self.u - self.w)
