"""Exception hierarchy shared by every module."""


class ConcatFJError(Exception):
    """Base class for all library errors."""


class ConfigError(ConcatFJError, ValueError):
    """Invalid input data or configuration."""


class NotRowStochastic(ConfigError):
    pass


class NegativeWeight(ConfigError):
    pass


class TooSmall(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class PolicyError(ConfigError):
    pass


class DomainViolation(ConfigError):
    """State lies outside the domain on which a reduced map is defined."""


class SimulationError(ConcatFJError, RuntimeError):
    """Numerical failure while evolving the model."""


class SingularSystem(SimulationError):
    pass


class NoConvergence(SimulationError):
    pass
