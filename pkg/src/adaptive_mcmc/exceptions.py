"""Exception hierarchy shared by all modules."""


class AdaptiveMCMCError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(AdaptiveMCMCError, ValueError):
    """Operands have incompatible support sizes or dimensions."""


class ParameterError(AdaptiveMCMCError, ValueError):
    """A parameter violates its documented invariants."""


class NumericalError(AdaptiveMCMCError, ArithmeticError):
    """A numerical routine failed to reach its requested accuracy."""


class ConfigError(AdaptiveMCMCError, ValueError):
    """An experiment configuration is malformed or fails validation."""


class InsufficientDataError(AdaptiveMCMCError, ValueError):
    """A trajectory is too short for the requested statistic."""
