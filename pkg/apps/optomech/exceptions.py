"""
Exception hierarchy for the optomechanics library.

Every error carries the process exit code the management commands map it to:
    0 success, 1 configuration error, 2 physics-domain error, 3 numerical failure.
"""

from typing import Optional


class OptomechError(Exception):
    """Base exception for all simulation errors."""
    exit_code = 1


# ========== Configuration (exit 1) ==========

class ConfigurationError(OptomechError):
    """Raised when a config document or flag cannot be parsed strictly."""
    exit_code = 1


class InvalidParameterError(ConfigurationError):
    """Raised when a parameter set violates its invariants."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


# ========== Physics domain (exit 2) ==========

class PhysicsDomainError(OptomechError):
    """Raised when the request is well-formed but outside the model's domain."""
    exit_code = 2


class InstabilityError(PhysicsDomainError):
    """Raised when a steady state is requested for an unstable drift matrix."""

    def __init__(self, message: str, verdict=None):
        super().__init__(message)
        self.verdict = verdict

    @property
    def margin(self) -> Optional[float]:
        return self.verdict.margin if self.verdict is not None else None


class ValidityDomainError(PhysicsDomainError):
    """Raised when the closed-form output modes are evaluated outside κ+G−² > κ−G+²."""
    pass


class UnphysicalCovarianceError(PhysicsDomainError):
    """Raised when a covariance matrix violates the bosonic uncertainty relation."""
    pass


class TemperatureDomainError(PhysicsDomainError):
    """Raised for non-positive reservoir temperatures."""
    pass


# ========== Numerical failures (exit 3) ==========

class NumericalError(OptomechError):
    """Base class for solver failures."""
    exit_code = 3


class EigenSolverError(NumericalError):
    pass


class SingularTransferError(NumericalError):
    """Raised when −iωI − A is singular (undamped resonance)."""

    def __init__(self, message: str, omega: Optional[float] = None):
        super().__init__(message)
        self.omega = omega


class QuadratureError(NumericalError):
    """Raised when the frequency integral does not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: Optional[float] = None):
        super().__init__(message)
        self.error_estimate = error_estimate


class LyapunovSolverError(NumericalError):
    pass


class TrajectoryBlowUpError(NumericalError):
    """Raised when a stochastic trajectory diverges during integration."""

    def __init__(self, message: str, step: Optional[int] = None, trajectory: Optional[int] = None):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory
