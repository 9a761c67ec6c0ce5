"""Dataset ingestion: CIFAR-10 binary batches, synthetic class-conditional
images, and the adversarial-set container used to reload attack outputs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from src.engine.errors import EmptySetError, LabelRangeError, ShapeMismatchError, TruncatedFileError

logger = logging.getLogger("freqlens")

CIFAR_SHAPE = (3, 32, 32)
CIFAR_CLASSES = 10
CIFAR_RECORD = 1 + 3 * 32 * 32
CIFAR_TEST_FILE = "test_batch.bin"
CIFAR_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))

ADVSET_MAGIC = "FREQLENS-ADVSET"
ADVSET_VERSION = "v1"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


class Provenance(str, Enum):
    CIFAR10 = "cifar10"
    SYNTHETIC = "synthetic"
    ADVERSARIAL = "adversarial"


@dataclass(frozen=True)
class Dataset:
    """Images (N, C, H, W) in [0,1] with labels in [0, num_classes)."""

    images: np.ndarray
    labels: np.ndarray
    split: Split
    provenance: Provenance
    num_classes: int

    def __post_init__(self):
        if self.images.ndim != 4:
            raise ShapeMismatchError("Dataset", f"images must be (N, C, H, W), got {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise ShapeMismatchError("Dataset", f"{len(self.images)} images vs {len(self.labels)} labels")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise ValueError("Dataset: pixel values must lie in [0, 1]")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise LabelRangeError(
                f"labels span [{self.labels.min()}, {self.labels.max()}], expected [0, {self.num_classes})"
            )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.images.shape[1:])

    @property
    def dataset_id(self) -> str:
        return f"{self.provenance.value}-{self.split.value}-n{len(self)}"

    def subset(self, n: int | None) -> "Dataset":
        """The first n samples (all of them when n is None or ≥ len)."""
        if n is None or n >= len(self):
            return self
        if n < 1:
            raise EmptySetError(f"subset size must be >= 1, got {n}")
        return replace(self, images=self.images[:n], labels=self.labels[:n])

    def with_images(self, images: np.ndarray, provenance: Provenance | None = None) -> "Dataset":
        return replace(self, images=np.asarray(images, dtype=np.float64), provenance=provenance or self.provenance)


# --- CIFAR-10 ---


def _parse_cifar_file(path: Path) -> tuple[np.ndarray, np.ndarray]:
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % CIFAR_RECORD:
        raise TruncatedFileError(f"{path}: {raw.size} bytes is not a positive multiple of {CIFAR_RECORD}")
    records = raw.reshape(-1, CIFAR_RECORD)
    labels = records[:, 0].astype(np.int64)
    if labels.max() >= CIFAR_CLASSES:
        raise LabelRangeError(f"{path}: label byte {labels.max()} outside 0..{CIFAR_CLASSES - 1}")
    images = records[:, 1:].reshape(-1, *CIFAR_SHAPE).astype(np.float64) / 255.0
    return images, labels


def load_cifar10(path: Path, split: Split | str = Split.TEST) -> Dataset:
    """
    Load CIFAR-10 from a binary batch file or from the extracted batch directory.

    Args:
        path: A single `*.bin` batch, or the directory holding test_batch.bin
            and data_batch_1..5.bin
        split: Which split to read when `path` is a directory

    Returns:
        Dataset with pixels scaled to [0,1], R plane then G then B
    """
    path = Path(path)
    split = Split(split)
    if path.is_dir():
        names = [CIFAR_TEST_FILE] if split is Split.TEST else list(CIFAR_TRAIN_FILES)
        files = [path / name for name in names]
        missing = [f.name for f in files if not f.exists()]
        if missing:
            raise FileNotFoundError(f"{path}: missing CIFAR-10 batch files {missing}")
    else:
        files = [path]
        split = Split.TEST if "test" in path.name else Split.TRAIN

    parts = [_parse_cifar_file(f) for f in files]
    images = np.concatenate([p[0] for p in parts])
    labels = np.concatenate([p[1] for p in parts])
    logger.info(f"Loaded {len(labels)} CIFAR-10 {split.value} samples from {path}")
    return Dataset(images, labels, split, Provenance.CIFAR10, CIFAR_CLASSES)


# --- synthetic ---


def _class_frequencies(num_classes: int, h: int, w: int) -> np.ndarray:
    """Mid-band (cycles_y, cycles_x) per class: fixed radius, evenly spread orientations."""
    radius = max(2.0, 3.0 * min(h, w) / 16.0)
    angles = np.pi * np.arange(num_classes) / num_classes
    return np.stack([radius * np.sin(angles), radius * np.cos(angles)], axis=1)


def synth_dataset(
    seed: int | Sequence[int],
    n: int,
    num_classes: int,
    shape: tuple[int, int, int] = CIFAR_SHAPE,
    split: Split | str = Split.TRAIN,
    noise: float = 0.03,
) -> Dataset:
    """Class-conditional images: a random low-frequency blob (class-independent),
    a class-specific mid-frequency sinusoid with random phase, and Gaussian
    noise. Labels are assigned round-robin so classes stay balanced within ±1.
    """
    if n < num_classes:
        raise ValueError(f"n ({n}) must be >= num_classes ({num_classes})")
    c, h, w = shape
    rng = np.random.default_rng(seed)
    labels = np.arange(n, dtype=np.int64) % num_classes
    freqs = _class_frequencies(num_classes, h, w)

    yy = np.arange(h, dtype=np.float64)[:, None] / h
    xx = np.arange(w, dtype=np.float64)[None, :] / w

    images = np.empty((n, c, h, w), dtype=np.float64)
    for i in range(n):
        cy, cx = rng.uniform(0.2, 0.8, size=2)
        width = rng.uniform(0.15, 0.35)
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * width * width))
        tint = rng.uniform(-0.25, 0.25, size=c)[:, None, None]

        fy, fx = freqs[labels[i]]
        phase = rng.uniform(0.0, 2 * np.pi)
        wave = np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)

        base = 0.5 + tint * blob + 0.15 * wave
        images[i] = base + noise * rng.standard_normal((c, h, w))

    np.clip(images, 0.0, 1.0, out=images)
    return Dataset(images, labels, Split(split), Provenance.SYNTHETIC, num_classes)


# --- adversarial-set container ---


def quantize(images: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(images, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_adversarial_set(dataset: Dataset, path: Path) -> Path:
    """Header line `FREQLENS-ADVSET v1 C H W N`, then N records of label byte + pixel planes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if dataset.num_classes > 256:
        raise LabelRangeError(f"container stores labels in one byte; {dataset.num_classes} classes")
    c, h, w = dataset.shape
    header = f"{ADVSET_MAGIC} {ADVSET_VERSION} {c} {h} {w} {len(dataset)}\n".encode("ascii")
    records = np.empty((len(dataset), 1 + c * h * w), dtype=np.uint8)
    records[:, 0] = dataset.labels.astype(np.uint8)
    records[:, 1:] = quantize(dataset.images).reshape(len(dataset), -1)
    with open(path, "wb") as f:
        f.write(header)
        f.write(records.tobytes())
    return path


def read_adversarial_set(path: Path, num_classes: int = CIFAR_CLASSES, split: Split | str = Split.TEST) -> Dataset:
    path = Path(path)
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    fields = raw[:newline].decode("ascii", errors="replace").split() if newline > 0 else []
    if len(fields) != 6 or fields[0] != ADVSET_MAGIC or fields[1] != ADVSET_VERSION:
        raise TruncatedFileError(f"{path}: not a {ADVSET_MAGIC} {ADVSET_VERSION} container")
    c, h, w, n = (int(v) for v in fields[2:])

    body = np.frombuffer(raw, dtype=np.uint8, offset=newline + 1)
    record = 1 + c * h * w
    if body.size != n * record:
        raise TruncatedFileError(f"{path}: expected {n} records of {record} bytes, found {body.size} bytes")
    records = body.reshape(n, record)
    labels = records[:, 0].astype(np.int64)
    images = records[:, 1:].reshape(n, c, h, w).astype(np.float64) / 255.0
    return Dataset(images, labels, Split(split), Provenance.ADVERSARIAL, num_classes)
