"""Exception types shared across the package."""


class MeasureCalculusError(Exception):
    """Base class for all package errors."""


class InputError(MeasureCalculusError, ValueError):
    """Invalid argument: wrong shape, sign, dimension or mismatched base point."""


class DomainError(MeasureCalculusError, ValueError):
    """Argument outside the region where an operation is defined (e.g. cut locus)."""


class NumericError(MeasureCalculusError, ArithmeticError):
    """Non-finite values or points drifting off the manifold."""


class ConfigError(MeasureCalculusError):
    """Unreadable or inconsistent scenario configuration."""
