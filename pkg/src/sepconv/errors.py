"""Exception hierarchy shared by every module."""


class SepConvError(Exception):
    """Base class for all errors raised by sepconv."""


class ShapeMismatch(SepConvError, ValueError):
    pass


class SingularFactor(SepConvError, ValueError):
    pass


class IndexOutOfRange(SepConvError, IndexError):
    pass


class ZeroVector(SepConvError, ValueError):
    pass


class NotCritical(SepConvError, ValueError):
    pass


class NoConvergence(SepConvError, RuntimeError):
    pass


class SingularReduction(SepConvError, ValueError):
    pass


class NonUnitaryStabilizer(SepConvError, ValueError):
    pass


class SingularDelta(SepConvError, ValueError):
    pass


class UnknownCatalogEntry(SepConvError, KeyError):
    pass


class CatalogObstruction(SepConvError, RuntimeError):
    """A catalog entry could not be realized at the required tolerance."""


class VanishingInvariant(SepConvError, ValueError):
    pass


class NonGenericState(SepConvError, ValueError):
    pass


class InconsistentEnsemble(SepConvError, ValueError):
    pass


class RankDeficient(SepConvError, ValueError):
    pass


class NonPositiveFactor(SepConvError, ValueError):
    pass


class InvalidStabilizer(SepConvError, ValueError):
    """The candidate group does not stabilize the reference state."""
