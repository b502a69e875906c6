"""Exception and warning types shared across the package."""


class UnitclustError(Exception):
    """Base class for every error raised by unitclust."""


class ZeroEndpointCoefficient(UnitclustError, ValueError):
    pass


class DegreeTooSmall(UnitclustError, ValueError):
    pass


class NonFiniteCoefficient(UnitclustError, ValueError):
    pass


class MismatchedDegree(UnitclustError, ValueError):
    pass


class RhoOutOfRange(UnitclustError, ValueError):
    pass


class BadSector(UnitclustError, ValueError):
    pass


class UnconvergedRoots(UnitclustError, RuntimeError):
    """A certificate was requested for a RootSet that failed the residual test."""


class BadModelParameters(UnitclustError, ValueError):
    pass


class MomentDiverges(UnitclustError, ValueError):
    pass


class BadSchedule(UnitclustError, ValueError):
    pass


class DegreeTooLargeForEnumeration(UnitclustError, ValueError):
    pass


class DidNotConverge(UserWarning):
    """Issued when the root solver returns its best iterate unconverged."""


class RootOnCircle(UserWarning):
    """Issued when quadrature meets a root too close to the unit circle."""
