"""Exception types raised by the geometry and filtering code."""


class EqfInsError(Exception):
    """Base class for all package errors."""


class StructureViolation(EqfInsError, ValueError):
    """A matrix does not have the structure required by the operation."""


class ChartBoundary(EqfInsError, ArithmeticError):
    """An error left the domain of the local logarithmic chart."""


class AngleNearPi(ChartBoundary):
    """Rotation angle too close to pi for a unique logarithm."""


class NonFiniteState(EqfInsError, FloatingPointError):
    """A filter state contains NaN or inf entries."""


class SingularInnovationCov(EqfInsError, ArithmeticError):
    """The innovation covariance could not be inverted."""


class ConfigError(EqfInsError, ValueError):
    """Invalid simulation or filter configuration."""
