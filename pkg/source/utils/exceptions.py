"""Exceptions module."""


class DistillFuseError(Exception):
    """Base class for all project errors."""


class InvalidChannelError(DistillFuseError, ValueError):
    """Image has a channel count the operation does not accept."""


class ShapeMismatchError(DistillFuseError, ValueError):
    """Operands have incompatible shapes."""


class ConfigError(DistillFuseError, ValueError):
    """Configuration is invalid or incomplete."""


class UsageError(DistillFuseError):
    """Command line usage is invalid."""


class DatasetError(DistillFuseError):
    """Dataset layout or content is invalid."""


class TextPriorError(DistillFuseError, ValueError):
    """Text prior input is invalid."""


class MetricError(DistillFuseError, ValueError):
    """Metric cannot be computed for the given images."""


class CheckpointFormatError(DistillFuseError):
    """Checkpoint file is malformed."""


class CheckpointVersionError(CheckpointFormatError):
    """Checkpoint file has an unsupported format version."""


class CheckpointShapeError(CheckpointFormatError):
    """Checkpoint tensor does not fit the network it is loaded into."""


class NumericalFailure(DistillFuseError, ArithmeticError):
    """Training produced a non-finite value."""
