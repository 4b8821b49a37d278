"""Exception types shared across the workbench."""


class AmrBenchError(Exception):
    """Base class for all workbench errors."""


class InvalidInputError(AmrBenchError, ValueError):
    """Caller passed data that violates an operation's preconditions."""


class WrongKindError(InvalidInputError):
    """Operation applied to a modulation scheme of the wrong kind."""


class CalibrationError(AmrBenchError, ValueError):
    """Signal power is outside the calibrated range expected by the channel."""


class ShapeError(AmrBenchError, ValueError):
    """Tensor shapes are incompatible; message names both shapes."""


class InvalidConfigError(AmrBenchError, ValueError):
    """Model configuration is structurally invalid."""


class ConfigParseError(InvalidConfigError):
    """Declarative config text failed to parse; message carries location."""


class InvalidLabelError(AmrBenchError, ValueError):
    """Label tensor is not one-hot or indexes a class that does not exist."""


class DivergenceError(AmrBenchError, RuntimeError):
    """Training produced a non-finite loss or gradient."""


class FormatError(AmrBenchError, ValueError):
    """Binary file does not conform to the native format."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionMismatchError(FormatError):
    """File format version is not supported by this reader."""


class TruncatedFileError(FormatError):
    """File ended before the declared payload was read."""


class ConsistencyError(AmrBenchError, ValueError):
    """Run artifacts that must agree (e.g. corpus hashes) do not."""


class ScenarioError(AmrBenchError, ValueError):
    """A curriculum scenario selects no frames from the given corpus."""
