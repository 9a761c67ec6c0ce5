"""Exception hierarchy shared by every freqlens package."""

from __future__ import annotations


class FreqlensError(Exception):
    """Base class for all freqlens failures."""


class ShapeMismatchError(FreqlensError):
    def __init__(self, op: str, detail: str):
        self.op = op
        super().__init__(f"{op}: shape mismatch: {detail}")


class UnsupportedOpError(FreqlensError):
    def __init__(self, op: str):
        self.op = op
        super().__init__(f"unsupported op: {op!r}")


class DisconnectedGraphError(FreqlensError):
    """A tensor passed to grad() does not influence the loss."""


class InvalidShapeError(FreqlensError):
    """Model or dataset shape outside what an architecture accepts."""


class AsymmetryError(FreqlensError):
    """Inverse transform left an imaginary residue larger than tolerated."""


class LayoutError(FreqlensError):
    """Spectrum passed in the wrong (natural/centered) layout."""


class EmptySetError(FreqlensError):
    """Operation needs at least one sample."""


class NonFiniteGradientError(FreqlensError):
    pass


class NonFiniteLossError(FreqlensError):
    pass


class TrainingDivergedError(FreqlensError):
    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"training diverged at epoch {epoch}, batch {batch}: loss={loss}")


class TruncatedFileError(FreqlensError):
    pass


class LabelRangeError(FreqlensError):
    pass


class CheckpointError(FreqlensError):
    """Unreadable checkpoint or one incompatible with the requested model."""


class ConfigError(FreqlensError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config error [{field}]: {message}")
