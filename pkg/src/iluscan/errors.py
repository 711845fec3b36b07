"""Exception types shared across the package."""

from __future__ import annotations


class IluScanError(Exception):
    """Base class for every error raised by this package."""


class EmptyBox(IluScanError):
    """Clipping or intersection left a box with no area."""


class ParseError(IluScanError):
    """A structured input file could not be parsed.

    `location` identifies the offending line or element when known.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class DuplicateId(ParseError):
    """A label-map id appeared more than once."""


class MissingField(ParseError):
    """A required field is absent from an annotation document."""

    def __init__(self, field: str, location: str | None = None):
        self.field = field
        super().__init__(f"missing field {field!r}", location)


class ConfigError(IluScanError):
    """A configuration document is malformed or violates an invariant."""


class BackendFailure(IluScanError):
    """A detector or text-detection backend failed; wraps the cause."""


class InputShapeError(BackendFailure):
    """A backend cannot accept the given frame shape."""


class MapShapeError(IluScanError):
    """Score and geometry maps have inconsistent dimensions."""


class EngineFailure(IluScanError):
    """The OCR engine failed on a crop; wraps the cause."""


class EngineUnavailable(EngineFailure):
    """The real OCR engine is not installed on this system."""


class ZeroTruth(IluScanError):
    """Evaluation was requested against an empty ground-truth set."""


class SceneInfeasible(IluScanError):
    """A synthetic scene layout cannot be rendered (text does not fit)."""


class StageError(IluScanError):
    """A pipeline stage failed; `stage` names where."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
