"""Exception types shared across the toolkit."""


class RisimError(Exception):
    """Base class for all toolkit errors."""


class DegenerateGeometryError(RisimError):
    """A distance that must be strictly positive is zero (or negative)."""


class UnsupportedGeometryError(RisimError):
    """The requested radiator arrangement is outside the supported model."""


class SingularNetworkError(RisimError):
    """A matrix inverse required by the network algebra does not exist."""

    def __init__(self, message, condition_number=None):
        if condition_number is not None:
            message = f"{message} (condition number {condition_number:.3e})"
        super().__init__(message)
        self.condition_number = condition_number


class ResonantDenominatorError(RisimError):
    """An impedance/reflection transform hit a (near-)zero denominator."""


class OpenBoundaryError(RisimError):
    """The boundary degenerates into a magnetic wall (|Z| -> infinity)."""


class PeriodMismatchError(RisimError):
    """Samples handed to the harmonic analysis do not span one period."""


class ConfigError(RisimError):
    """An experiment configuration could not be parsed or validated."""
