"""Exception types raised by plrg."""


class PLRGError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PLRGError, ValueError):
    pass


class EmptySampleError(InvalidParameterError):
    pass


class RangeError(InvalidParameterError):
    pass


class RegionError(InvalidParameterError):
    """Parameters fall outside the regime an operation is defined for."""


class SizeError(PLRGError):
    """Input exceeds a computational guard (e.g. an O(n^2) construction)."""


class NumericError(PLRGError, ArithmeticError):
    pass
