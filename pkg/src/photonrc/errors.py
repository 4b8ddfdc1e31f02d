"""Exception hierarchy shared across the pipeline.

Two intermediate bases exist so callers (notably the CLI) can map whole
families to exit codes: ``DataError`` for malformed or missing inputs,
``NumericalError`` for computations that degenerate.
"""


class PhotonRcError(Exception):
    """Base class for all package-specific errors."""


class DataError(PhotonRcError):
    """Input data is malformed, missing, or inconsistent."""


class ParseError(DataError):
    """A file could not be parsed at all."""


class SchemaError(DataError):
    """A parsed file violates its documented schema."""


class MissingFrameError(DataError):
    """A manifest references a frame file that does not exist."""


class LabelError(DataError):
    """An action label is not one of the six known classes."""


class DimensionError(DataError):
    """Array dimensions do not match what an operation requires."""


class NumericalError(PhotonRcError):
    """A numerical computation degenerated."""


class RankError(NumericalError):
    """A decomposition has lower rank than the request requires."""


class SingularError(NumericalError):
    """A linear system is singular (or numerically indistinguishable from it)."""


class DegenerateTargetError(NumericalError):
    """A target signal has zero variance, so a normalized error is undefined."""


class NotAPipelineDirError(DataError):
    """A directory was not produced by a pipeline or grid-search run."""


class PipelineStageError(PhotonRcError):
    """A pipeline stage failed; carries the stage name and the root cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
