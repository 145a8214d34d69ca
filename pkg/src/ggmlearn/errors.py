"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs or
parameters (CLI exit code 2) and :class:`NumericalError` for failures of a
numerical routine on otherwise valid input (CLI exit code 3).
"""


class GgmError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GgmError, ValueError):
    pass


class NumericalError(GgmError, ArithmeticError):
    pass


class NotSymmetric(ValidationError):
    pass


class BadParams(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnknownName(ValidationError):
    pass


class EmptySplit(ValidationError):
    pass


class MissingNode(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class EnumerationBudgetExceeded(ValidationError):
    pass


class NotAttractive(ValidationError):
    pass


class NotPD(NumericalError):
    pass


class SingularBlock(NumericalError):
    pass


class SingularSubmatrix(NumericalError):
    pass


class SingularLaplacian(NumericalError):
    pass


class SingularCovariance(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NotWalkSummable(NumericalError):
    pass


class NotSDD(ValidationError):
    pass


class RankDeficient(NumericalError):
    pass


class ZeroVarianceColumn(NumericalError):
    pass


class ZeroDiagonal(NumericalError):
    pass


class Unattainable(NumericalError):
    def __init__(self, m_max, message=None):
        self.m_max = m_max
        super().__init__(message or f"error threshold not met with m <= {m_max}")


class GridExhausted(NumericalError):
    pass
