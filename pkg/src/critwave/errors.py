"""Exception hierarchy shared by all critwave modules."""


class CritwaveError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CritwaveError, ValueError):
    """A parameter or field violates one of its documented constraints."""


class ConfigError(CritwaveError, ValueError):
    """A run configuration is inconsistent (bad time step, unknown key, ...)."""


class StructuralError(CritwaveError, ValueError):
    """Inputs that should match do not (grids, time spacing, parameters)."""


class DomainError(CritwaveError, ValueError):
    """Evaluation requested outside the admissible space-time domain."""


class NumericalBlowupError(CritwaveError, ArithmeticError):
    """Fields left the admissible range or became non-finite during a run."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DomainTooSmallError(CritwaveError, RuntimeError):
    """A front approached the boundary closer than the safety margin."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoMonotoneWaveError(CritwaveError, ValueError):
    """Requested wave speed is below the minimal speed of monotone profiles."""


class StiffnessError(CritwaveError, RuntimeError):
    """Adaptive ODE integration failed (step-size underflow)."""
