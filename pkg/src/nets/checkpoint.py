"""Versioned binary checkpoint container for ModelParams.

Layout (little-endian):
    8s   magic  b"FQLNCKPT"
    H    version
    H    arch tag length, then the UTF-8 tag
    I    num_classes
    3I   input shape C, H, W
    I    tensor count
    per tensor, sorted by name:
        H name length, name, B ndim, ndim × I dims, raw <f8 values
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.engine.errors import CheckpointError, InvalidShapeError
from src.nets.models import Architecture, ModelParams

MAGIC = b"FQLNCKPT"
VERSION = 1


def _pack_str(buf: io.BytesIO, text: str) -> None:
    raw = text.encode("utf-8")
    buf.write(struct.pack("<H", len(raw)))
    buf.write(raw)


def serialize(params: ModelParams) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", VERSION))
    _pack_str(buf, params.arch.value)
    buf.write(struct.pack("<I", params.num_classes))
    buf.write(struct.pack("<3I", *params.input_shape))
    buf.write(struct.pack("<I", len(params.weights)))
    for name in sorted(params.weights):
        arr = params.weights[name]
        _pack_str(buf, name)
        buf.write(struct.pack("<B", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(arr.astype("<f8").tobytes(order="C"))
    return buf.getvalue()


class _Reader:
    def __init__(self, raw: bytes, source: str):
        self.raw = raw
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise CheckpointError(f"{self.source}: truncated at byte {self.pos}")
        chunk = self.raw[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def deserialize(raw: bytes, source: str = "<bytes>") -> ModelParams:
    reader = _Reader(raw, source)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{source}: not a freqlens checkpoint (bad magic)")
    (version,) = reader.unpack("<H")
    if version != VERSION:
        raise CheckpointError(f"{source}: unsupported checkpoint version {version}")

    tag = reader.string()
    try:
        arch = Architecture(tag)
    except ValueError:
        raise CheckpointError(f"{source}: unknown architecture tag {tag!r}") from None
    (num_classes,) = reader.unpack("<I")
    input_shape = reader.unpack("<3I")
    (count,) = reader.unpack("<I")

    weights = {}
    for _ in range(count):
        name = reader.string()
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape)) if ndim else 1
        weights[name] = np.frombuffer(reader.take(8 * size), dtype="<f8").reshape(shape).astype(np.float64)

    if reader.pos != len(raw):
        raise CheckpointError(f"{source}: {len(raw) - reader.pos} trailing bytes")

    try:
        return ModelParams(arch=arch, weights=weights, num_classes=num_classes, input_shape=input_shape)
    except ValidationError as e:
        raise CheckpointError(f"{source}: {e.errors()[0]['msg']}") from e
    except InvalidShapeError as e:
        raise CheckpointError(f"{source}: {e}") from e


def save_checkpoint(params: ModelParams, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize(params))
    return path


def load_checkpoint(
    path: Path,
    expect_arch: Architecture | str | None = None,
    expect_shape: tuple[int, int, int] | None = None,
) -> ModelParams:
    """Read a checkpoint; optionally fail if it does not match the configured model."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    params = deserialize(raw, source=str(path))

    if expect_arch is not None and params.arch is not Architecture(expect_arch):
        raise CheckpointError(f"{path}: checkpoint arch {params.arch.value} != configured {Architecture(expect_arch).value}")
    if expect_shape is not None and params.input_shape != tuple(expect_shape):
        raise CheckpointError(f"{path}: checkpoint input shape {params.input_shape} != dataset shape {tuple(expect_shape)}")
    return params
