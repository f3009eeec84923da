"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """A scenario or link table is incomplete or out of range."""


class DomainAssumptionError(ValueError):
    """Inputs violate a modelling assumption of the closed forms."""


class InternalConsistencyError(ArithmeticError):
    """A computed quantity left its admissible range beyond round-off."""


class UnstableChainError(ValueError):
    """A steady-state quantity was requested for a chain without drift to zero."""


class TruncationError(RuntimeError):
    """A truncated stationary solve could not bound its tail mass."""

    def __init__(self, message, tail_mass):
        super().__init__(message)
        self.tail_mass = tail_mass
