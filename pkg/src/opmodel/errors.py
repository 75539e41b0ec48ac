"""Exception hierarchy shared by every module."""


class OpModelError(Exception):
    """Base class for all errors raised by opmodel."""


class InputError(OpModelError, ValueError):
    """Malformed or inconsistent input (CLI exit code 1)."""


class ParseError(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotSquare(DimensionMismatch):
    pass


class InvalidAlpha(InputError):
    pass


class EmptyGenerators(InputError):
    pass


class PointOutsideDisc(InputError):
    pass


class NotOrthonormal(InputError):
    pass


class HypothesisFailure(OpModelError):
    """The operator or subspace violates the hypotheses a construction needs."""


class NotContraction(HypothesisFailure):
    pass


class NotC0(HypothesisFailure):
    pass


class NotInvariant(HypothesisFailure):
    pass


class NumericalFailure(OpModelError):
    """Numerical breakdown (CLI exit code 3)."""


class NotHermitian(NumericalFailure):
    pass


class NotPSD(NumericalFailure):
    pass


class TruncationOverflow(NumericalFailure):
    pass


class DegreeOverflowWarning(UserWarning):
    """A product of polynomials produced terms above the truncation degree."""


class ToleranceWarning(UserWarning):
    pass
