"""Alignment kinetics f0(u, w) = w (1 - w^2/u^2) exp(-beta^2 u^2) and its partials."""

import math
from typing import Tuple

import numpy as np

from app.utils.errors import DomainError

# below this density the PDE right-hand side uses the limit value f0 = 0
DEPLETION_DENSITY = 1e-30


def _check_density(u: float):
    if not u > 0:
        raise DomainError(f"alignment requires u > 0, got u={u}", {"u": u})


def alignment(u: float, w: float, beta: float = 0.0) -> float:
    """Alignment rate f0 at (u, w); odd in w and zero at w in {-u, 0, u}."""
    _check_density(u)
    return w * (u - w) * (u + w) / (u * u) * math.exp(-(beta * u) ** 2)


def alignment_partials(u: float, w: float, beta: float = 0.0) -> Tuple[float, float]:
    """Exact (df0/du, df0/dw)."""
    _check_density(u)
    crowd = math.exp(-(beta * u) ** 2)
    ratio = w / u
    f_u = crowd * (2.0 * ratio ** 3 - 2.0 * beta ** 2 * u * w * (1.0 - ratio ** 2))
    f_w = crowd * (1.0 - 3.0 * ratio ** 2)
    return f_u, f_w


def alignment_field(u: np.ndarray, w: np.ndarray, beta: float = 0.0) -> np.ndarray:
    """Vectorised f0 for the PDE; cells with u below DEPLETION_DENSITY get 0."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    safe_u = np.where(u > DEPLETION_DENSITY, u, 1.0)
    rate = w * (safe_u - w) * (safe_u + w) / (safe_u * safe_u) * np.exp(-(beta * safe_u) ** 2)
    return np.where(u > DEPLETION_DENSITY, rate, 0.0)
