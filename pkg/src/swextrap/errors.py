"""Exception hierarchy shared by every module."""


class SWExtrapError(Exception):
    """Base class for all package errors."""


class NonHermitian(SWExtrapError, ValueError):
    pass


class NoConvergence(SWExtrapError, ArithmeticError):
    pass


class DimensionMismatch(SWExtrapError, ValueError):
    pass


class UnknownSite(SWExtrapError, KeyError):
    pass


class NonQubit(SWExtrapError, ValueError):
    pass


class OutOfDomain(SWExtrapError, ValueError):
    pass


class Degenerate(SWExtrapError, ArithmeticError):
    """Ground space is not one-dimensional within the degeneracy tolerance."""


class QuadratureFailure(SWExtrapError, ArithmeticError):
    pass


class TruncationOverflow(SWExtrapError, RuntimeError):
    pass


class NotAGadget(SWExtrapError, ValueError):
    pass


class DegreeTooHigh(SWExtrapError, ValueError):
    pass


class AncillaCollision(SWExtrapError, ValueError):
    pass


class InvalidArity(SWExtrapError, ValueError):
    pass


class NonPositiveX(SWExtrapError, ValueError):
    pass


class LengthMismatch(SWExtrapError, ValueError):
    pass


class Infeasible(SWExtrapError, ValueError):
    pass


class TooLarge(SWExtrapError, ValueError):
    pass


class UnknownSuite(SWExtrapError, KeyError):
    pass
