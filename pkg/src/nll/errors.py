"""Exception hierarchy shared by all modules."""


class NLLError(Exception):
    """Base class for every error raised by the package."""


class ParameterDomainError(NLLError, ValueError):
    pass


class KernelValidationError(NLLError, ValueError):
    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class DomainError(NLLError, ValueError):
    pass


class PreconditionError(NLLError, ValueError):
    pass


class TailSpaceError(NLLError, ArithmeticError):
    """The field is not in the tail space, so a tail integral diverges."""


class AccuracyNotReached(NLLError, ArithmeticError):
    """Refinement budget ran out before the requested tolerance."""

    def __init__(self, message, value, estimate):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class KmaxTooSmallError(NLLError, ArithmeticError):
    def __init__(self, message, remainder, partial):
        super().__init__(message)
        self.remainder = remainder
        self.partial = partial


class RegimeError(NLLError, ValueError):
    pass


class InternalConsistencyError(NLLError, AssertionError):
    pass


class CalibrationImpossible(NLLError, ArithmeticError):
    def __init__(self, message, radius):
        super().__init__(message)
        self.radius = radius


class ConfigError(NLLError, ValueError):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
