"""Exception and warning types raised by the engine."""


class NMBlochError(Exception):
    """Base class for all engine errors."""


class DegenerateSystemError(NMBlochError, ValueError):
    """Raised when the dressed splitting vanishes (Delta = Omega = 0)."""


class ConfigError(NMBlochError, ValueError):
    """Invalid scenario configuration. ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class SpecialFunctionError(NMBlochError, ArithmeticError):
    """A special function was evaluated outside its domain or failed."""

    def __init__(self, message, argument=None):
        self.argument = argument
        super().__init__(message if argument is None else f"{message} (argument={argument!r})")


class QuadratureError(NMBlochError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class IntegrationError(NMBlochError, RuntimeError):
    """The ODE integrator failed (step-size underflow or rate failure)."""


class ModelValidityWarning(UserWarning):
    """Parameters fall outside the regime where the master equation is trusted."""


class RegimeMismatchWarning(UserWarning):
    """An analysis was invoked on data from the wrong (secular/nonsecular) regime."""
