"""Exception hierarchy shared by all modules."""


class RMTError(Exception):
    """Base class for library errors."""


class DimensionMismatch(RMTError, ValueError):
    pass


class NotAntisymmetric(RMTError, ValueError):
    pass


class SingularBlock(RMTError, ArithmeticError):
    pass


class CoincidentPoints(RMTError, ValueError):
    pass


class NonConvergentQuadrature(RMTError, ArithmeticError):
    pass


class PoleOnSupport(RMTError, ValueError):
    pass


class UnsupportedOrder(RMTError, ValueError):
    pass


class InvalidParameter(RMTError, ValueError):
    pass


class SingularMomentMatrix(RMTError, ArithmeticError):
    pass


class UnsupportedEnsemble(RMTError, ValueError):
    pass


class SeriesNonConvergent(RMTError, ArithmeticError):
    pass


class DegenerateField(RMTError, ValueError):
    pass


class KExceedsN(RMTError, ValueError):
    pass


class DimensionTooLarge(RMTError, ValueError):
    pass


class InsufficientSamples(RMTError, ArithmeticError):
    pass
