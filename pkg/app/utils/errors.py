from typing import Any, Dict, Optional

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class WaveError(Exception):
    """Base class for every error raised by the wave numerics."""

    exit_code = EXIT_NUMERICAL
    status_code = 422

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record for manifests and the CLI."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class DomainError(WaveError, ValueError):
    """Argument outside the domain of the operation (e.g. u <= 0)."""

    exit_code = EXIT_CONFIG
    status_code = 400


class SingularSpeedError(DomainError):
    """Wave speed |c| = 1 where 1 - c^2 appears in a denominator."""


class DegenerateSpeedError(DomainError):
    """Wave speed in {-1, 0, 1} where equilibria cannot be classified."""


class SingularPerturbationError(DomainError):
    """a <= 0 passed to the first-order or reduced traveling-wave system."""


class NonPositiveDensityError(DomainError):
    """Initial data would contain non-positive densities."""


class ConfigurationError(WaveError):
    exit_code = EXIT_CONFIG
    status_code = 400


class StiffnessError(WaveError):
    """The adaptive integrator could not make progress."""


class SolverInstabilityError(WaveError):
    """Positivity of the characteristic fields was lost during a run."""


class BoundaryApproachError(WaveError):
    """A front came too close to an outflow boundary."""


class InsufficientDataError(WaveError):
    """Too few samples to fit a front speed."""
