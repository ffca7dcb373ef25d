"""Exception hierarchy shared by all modules."""


class PersistWalkError(Exception):
    """Base class for every error raised by persistwalk."""


# laws
class LawError(PersistWalkError, ValueError):
    pass


class LawSpecError(LawError):
    """A law spec string could not be parsed; ``token`` is the offending piece."""

    def __init__(self, message, token=None):
        super().__init__(message if token is None else f"{message}: {token!r}")
        self.token = token


class NonCentered(LawError):
    pass


class InvalidMass(LawError):
    pass


class ZeroVariance(LawError):
    pass


class NoPositivePart(LawError):
    pass


class NotApplicable(LawError):
    pass


class DegenerateLaw(LawError):
    pass


class HypothesisNotMet(PersistWalkError, ValueError):
    pass


# exact computations
class NotLattice(PersistWalkError, ValueError):
    pass


class StateBudgetExceeded(PersistWalkError, RuntimeError):
    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class TooLarge(PersistWalkError, ValueError):
    pass


class OvershootNotDiscrete(PersistWalkError, ValueError):
    pass


# series
class BadConstantTerm(PersistWalkError, ValueError):
    pass


class TruncationTooShort(PersistWalkError, ValueError):
    pass


# simulation / estimation
class CycleBudgetExceeded(PersistWalkError, RuntimeError):
    pass


class IncompleteCycles(PersistWalkError, ValueError):
    pass


class InsufficientData(PersistWalkError, ValueError):
    pass


class EmptySample(PersistWalkError, ValueError):
    pass


class InvalidRegion(PersistWalkError, ValueError):
    pass
