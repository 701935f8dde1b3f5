"""Exception hierarchy.

Every error raised on bad data or an unreachable source derives from
:class:`VeconError`, so callers (and the CLI) can separate domain failures
from programming errors with a single ``except`` clause.
"""


class VeconError(Exception):
    """Base class for all domain and data errors."""


class InvalidValue(VeconError, ValueError):
    """A constructor argument violates a type invariant."""


# ingestion
class MalformedDocument(VeconError, ValueError):
    pass


class EmptySeries(VeconError, ValueError):
    pass


class NonPositivePrice(InvalidValue):
    pass


class DuplicateDay(VeconError, ValueError):
    pass


class NonPositiveVolume(InvalidValue):
    pass


class DuplicateItem(VeconError, ValueError):
    pass


class SourceUnavailable(VeconError, OSError):
    pass


class MissingFixture(SourceUnavailable):
    pass


class InsufficientCoverage(VeconError, ValueError):
    pass


class NoOverlap(VeconError, ValueError):
    pass


class MalformedSnapshotFile(VeconError, ValueError):
    pass


class SchemaVersionMismatch(MalformedSnapshotFile):
    pass


# transforms / descriptive / indexes
class NonPositiveValue(VeconError, ValueError):
    pass


class SeriesTooShort(VeconError, ValueError):
    pass


class KOutOfRange(VeconError, ValueError):
    pass


class TooFewItems(VeconError, ValueError):
    pass


class EmptyMembership(VeconError, ValueError):
    pass


class UnknownMember(VeconError, LookupError):
    pass


class ZeroEndValue(VeconError, ZeroDivisionError):
    pass


# stationarity
class RankDeficient(VeconError, ValueError):
    pass


class TooFewObservations(VeconError, ValueError):
    pass


class DegenerateSeries(VeconError, ValueError):
    pass


# heatmap
class NoPoints(VeconError, ValueError):
    pass


class NonFiniteCoordinate(VeconError, ValueError):
    pass


class NegativeSigma(VeconError, ValueError):
    pass


class IoFailure(VeconError, OSError):
    pass


# report
class EmptySnapshot(VeconError, ValueError):
    pass
