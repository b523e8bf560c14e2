"""Exceptions and warnings shared across the package."""


class TableTidyError(Exception):
    """Base class for all package errors."""


# --- mask / geometry ---------------------------------------------------------

class EmptyMask(TableTidyError):
    """A mask operation needed at least one foreground pixel."""


class EmptySet(TableTidyError):
    """A point-set operation received an empty point set."""


class EmptyLayout(TableTidyError):
    """A layout operation needed at least one entry."""


class EmptyList(TableTidyError):
    """An aggregate operation received an empty input list."""


# --- scene / prompting -------------------------------------------------------

class SceneValidationError(TableTidyError):
    """A scene or candidate document violated the published schema."""


class NoNounFound(TableTidyError):
    """No usable object noun could be extracted from a caption."""


# --- providers ---------------------------------------------------------------

class ProviderUnavailable(TableTidyError):
    """The goal-image provider could not be reached or returned an error."""


class MalformedCandidate(TableTidyError):
    """A provider returned a candidate that violates the candidate schema."""


class FixtureExhausted(TableTidyError):
    """A fixture provider ran out of candidate files."""


class NoValidCandidate(TableTidyError):
    """No count-valid candidate was produced within the batch budget."""


# --- matching ----------------------------------------------------------------

class DimensionMismatch(TableTidyError):
    """Feature vectors or object lists disagree in size."""


class NoCandidates(TableTidyError):
    """Goal selection was called with zero candidates."""


# --- layout / planning -------------------------------------------------------

class Unresolvable(TableTidyError):
    """Collision resolution did not reach a collision-free layout in time."""


class OutOfBounds(TableTidyError):
    """An object cannot be placed inside the workspace bounds."""


class NoIntermediateSpace(TableTidyError):
    """No free intermediate pose exists for a blocking object."""


class UnknownObject(TableTidyError):
    """A plan referenced an object id that is not part of the layout."""


# --- evaluation --------------------------------------------------------------

class PlacementFailed(TableTidyError):
    """Random placement could not find a collision-free pose in time."""


class DoesNotFit(TableTidyError):
    """Objects do not fit in the requested arrangement."""


class NoFreePose(TableTidyError):
    """No collision-free pose exists along the scanned line."""


# --- pipeline ----------------------------------------------------------------

class IoFailure(TableTidyError):
    """An artifact could not be written."""


class PipelineStageError(TableTidyError):
    """Wraps a module error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause.__class__.__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class SymmetryWarning(UserWarning):
    """Mask alignment is ambiguous: another restart fits almost as well."""
