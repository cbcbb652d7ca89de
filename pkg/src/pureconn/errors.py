"""Exception hierarchy. Every error raised by the package derives from PureConnError."""


class PureConnError(Exception):
    pass


class DomainError(PureConnError, ValueError):
    """Point outside a chart domain, or too close to its boundary for a stencil."""


class NumericError(PureConnError, ArithmeticError):
    """Non-finite or singular intermediate values."""


class DefinitenessError(PureConnError, ValueError):
    pass


class SignError(PureConnError, ValueError):
    """Sign of a definite connection does not match the sign of Lambda."""


class ArgumentError(PureConnError, ValueError):
    pass


class OrientationError(PureConnError, ValueError):
    pass


class PreconditionError(PureConnError, ValueError):
    pass


class ConsistencyError(PureConnError, RuntimeError):
    """Two independent computation routes disagree."""


class ConvergenceError(PureConnError, RuntimeError):
    pass


class ConfigError(PureConnError, ValueError):
    pass
