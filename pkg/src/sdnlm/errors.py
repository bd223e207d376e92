"""Exception hierarchy.

``NumericError`` subclasses signal numeric failures on valid input (CLI exit
code 2); ``InputError`` subclasses signal malformed input (exit code 1).
"""


class SdnlmError(Exception):
    pass


class NumericError(SdnlmError):
    pass


class InputError(SdnlmError):
    pass


class DomainError(NumericError, ValueError):
    pass


class SingularMatrix(NumericError):
    pass


class DegenerateSample(NumericError):
    pass


class ZeroVariance(NumericError):
    code = "zero-variance"


class DegenerateRange(NumericError):
    code = "degenerate-range"


class DimensionMismatch(InputError, ValueError):
    pass


class CorruptHeader(InputError):
    pass


class SizeMismatch(InputError):
    pass


class NonFiniteValue(InputError):
    pass
