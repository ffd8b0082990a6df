"""Exception hierarchy for mofkit."""


class MofkitError(Exception):
    """Base class for every error raised by mofkit."""


class DimensionMismatch(MofkitError, ValueError):
    pass


class StructureViolation(MofkitError, ValueError):
    pass


class NotPositive(MofkitError, ValueError):
    pass


class NotInvertible(MofkitError, ValueError):
    pass


class NotTwoFactor(MofkitError, ValueError):
    pass


class MetricAxiomViolation(MofkitError, ValueError):
    pass


class BundleMismatch(MofkitError, ValueError):
    pass


class NotCentral(MofkitError, ValueError):
    pass


class NormBoundExceeded(MofkitError, ValueError):
    pass


class InvalidPartition(MofkitError, ValueError):
    pass


class StateFamilyMismatch(MofkitError, ValueError):
    """The reused metric-state family does not annihilate the new diagonal."""


class SamePoint(MofkitError, ValueError):
    pass


class NotCommuting(MofkitError, ValueError):
    pass


class NoBasePoint(MofkitError, ValueError):
    pass


class AllScalar(MofkitError, ValueError):
    pass


class TooFewPoints(MofkitError, ValueError):
    pass


class NotNormal(MofkitError, ValueError):
    pass


class NotScalarMof(MofkitError, ValueError):
    pass


class PartitionInvalid(MofkitError, ValueError):
    """A cover's partition functions are not a partition of unity."""


class TheoremViolation(MofkitError, AssertionError):
    """A bound that holds for every valid mof failed numerically."""


class ParseError(MofkitError, ValueError):
    pass


class SchemaVersionMismatch(MofkitError, ValueError):
    pass
