"""Exception hierarchy for the toolkit.

Two intermediate bases drive CLI exit codes: ``ValidationError`` (malformed
values, schemas, or dimensions) maps to exit code 2, ``DataError``
(well-formed inputs that are inconsistent with the data at hand) maps to 3.
"""


class GraspFusionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GraspFusionError):
    """Input fails a structural or numerical contract."""


class DataError(GraspFusionError):
    """Input is structurally fine but names data that does not exist or fit."""


class NegativeEntry(ValidationError):
    pass


class AllZero(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class SchemaViolation(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class MissingInput(ValidationError):
    """A decision method was asked to run without one of its required inputs."""

    def __init__(self, component: str):
        self.component = component
        super().__init__(f"missing required input: {component}")


class PriorZeroOnSupport(ValidationError):
    pass


class UnknownLabel(DataError):
    pass


class EmptyManifest(DataError):
    pass


class DuplicateImageId(DataError):
    pass


class UnknownImageId(DataError):
    pass


class ObjectNotFound(DataError):
    """Lookup missed; carries the normalized query so callers can report it."""

    def __init__(self, query: str):
        self.query = query
        super().__init__(f"object not found in affordance database: {query!r}")


class InsufficientImages(DataError):
    """Sampling asked for more images than a stratum holds."""

    def __init__(self, stratum: str, requested: int, available: int):
        self.stratum = stratum
        self.requested = requested
        self.available = available
        super().__init__(
            f"stratum {stratum!r} has {available} images, {requested} requested"
        )


class MissingDistribution(DataError):
    pass


class EmptyDatabase(DataError):
    pass


class MismatchedTrialCount(DataError):
    pass


class IoFailure(DataError):
    pass
