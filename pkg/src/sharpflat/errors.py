class SharpflatError(ArithmeticError):
    """Base class for every error raised by the package."""


class DescriptorMismatch(SharpflatError):
    pass


class DivisionByZeroAtPrecision(SharpflatError, ZeroDivisionError):
    pass


class IndistinguishableFromZero(SharpflatError):
    def __init__(self, bound, msg=None):
        self.bound = bound
        super().__init__(msg or f"element is zero modulo p^{bound}; valuation >= {bound}")


class UnsupportedRing(SharpflatError):
    pass


class ZeroResidue(SharpflatError):
    pass


class NotASubring(SharpflatError):
    pass


class CapMismatch(SharpflatError):
    pass


class NotInDisk(SharpflatError):
    pass


class LevelZero(SharpflatError):
    pass


class NotReversible(SharpflatError):
    pass


class ZeroAtPrecision(SharpflatError):
    pass


class LambdaExceedsCap(SharpflatError):
    pass


class StageLambdaExceedsCap(LambdaExceedsCap):
    pass


class NotPreparable(SharpflatError):
    """Two-variable input whose content-free part is not general in the second variable."""


class NonConvergent(SharpflatError):
    pass


class PrecisionExhausted(SharpflatError):
    pass


class NotDecomposable(SharpflatError):
    pass


class IntegralityViolation(SharpflatError):
    pass


class SingularAtLevel(SharpflatError):
    """Finite-level system with undetermined components."""


class NonPrimitiveCharacterWarning(UserWarning):
    pass


class CapTooSmallWarning(UserWarning):
    pass
