"""Exception types raised by the library."""


class IsospecError(ValueError):
    """Base class; the CLI maps these to exit code 2."""


class NotSkew(IsospecError):
    pass


class DependentGenerators(IsospecError):
    pass


class DimensionMismatch(IsospecError):
    pass


class DegenerateA(IsospecError):
    pass


class NotImaginary(IsospecError):
    pass


class NotPerpendicular(IsospecError):
    pass


class NotSymmetric(IsospecError):
    pass


class NotInvariant(IsospecError):
    pass


class NotAnticommutator(IsospecError):
    pass


class NotUnitRescalable(IsospecError):
    pass


class NotConjugate(IsospecError):
    pass


class NotAnticommutatorWithComplement(IsospecError):
    pass


class NotUnit(IsospecError):
    pass


class NotHomogeneous(IsospecError):
    pass


class ZeroProjection(IsospecError):
    pass


class SingularSubstitution(IsospecError):
    pass


class TruncationTooSmall(IsospecError):
    pass


class NotPositiveDefinite(IsospecError):
    pass


class TruncationMismatch(IsospecError):
    pass
