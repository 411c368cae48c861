"""Exception hierarchy shared across the toolkit.

Validation problems (bad input data, infeasible configuration) and numerical
failures are kept distinct because the CLI maps them to different exit codes
and the HTTP service maps them to different status codes.
"""


class PaletteError(Exception):
    """Base class for all toolkit errors."""


class EnsembleValidationError(PaletteError):
    """Raised when an ensemble fails parsing or validation."""


class EmptyGroupError(PaletteError):
    """Raised when a group's assignment vector has zero total mass."""


class ConfigError(PaletteError):
    """Raised when a pipeline configuration is infeasible for the input."""


class NumericalError(PaletteError):
    """Raised when a numerical kernel cannot produce a valid result."""


class ReportSchemaError(PaletteError):
    """Raised when a persisted report cannot be read back."""


class PipelineStageError(PaletteError):
    """Wraps a failure inside one pipeline stage with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
