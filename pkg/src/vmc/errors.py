"""Exception types shared across the package."""


class VmcError(Exception):
    """Base class for all package errors."""


class InvalidLevel(VmcError):
    pass


class InvalidState(VmcError):
    pass


class InvalidMatrix(VmcError):
    pass


class InvalidDistribution(VmcError):
    pass


class LevelMismatch(VmcError):
    pass


class NotCompatible(VmcError):
    pass


class NotInD2(VmcError):
    pass


class NotErgodic(VmcError):
    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class NotDoublyStochastic(VmcError):
    pass


class DegenerateDenominator(VmcError):
    pass


class IsExtreme(VmcError):
    pass


class TooLarge(VmcError):
    pass


class InsufficientData(VmcError):
    pass


class IncoherentPermutations(VmcError):
    pass
