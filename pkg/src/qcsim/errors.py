"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class DomainError(SimulationError, ValueError):
    """A parameter lies outside its physical domain (negative r, eta > 1, ...)."""


class HidingWindowError(SimulationError):
    """The correlation parameter is too weak to conceal any signal.

    The window of usable signal powers is non-empty only for
    r > ln(3)/4 ~ 0.2747.
    """


class SignalBudgetError(SimulationError):
    """A modulation power falls outside the allowed hiding window."""


class ProtocolOrderError(SimulationError):
    """An operation was invoked in a protocol phase that does not allow it."""


class ConfigError(SimulationError):
    """A session configuration file or value is invalid."""
