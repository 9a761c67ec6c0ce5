"""Pydantic models for classifier parameters and labeled batches."""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, field_validator, model_validator


class Architecture(str, Enum):
    """Supported classifier architectures."""
    TINY_CONVNET = "tiny_convnet"
    TINY_ATTN = "tiny_attn"
    LINEAR = "linear"  # closed-form reference model


class ModelParams(BaseModel):
    """All trainable weights of one classifier, tagged with its architecture."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    arch: Architecture
    weights: dict[str, np.ndarray]
    num_classes: int
    input_shape: tuple[int, int, int]

    @field_validator("weights", mode="before")
    @classmethod
    def freeze_weights(cls, v: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        frozen = {}
        for name in sorted(v):
            arr = np.array(v[name], dtype=np.float64)
            arr.flags.writeable = False
            frozen[name] = arr
        return frozen

    @model_validator(mode="after")
    def check_shapes(self) -> "ModelParams":
        from src.nets.architectures import weight_specs

        specs = weight_specs(self.arch, self.input_shape, self.num_classes)
        if set(specs) != set(self.weights):
            missing = sorted(set(specs) - set(self.weights))
            extra = sorted(set(self.weights) - set(specs))
            raise ValueError(f"{self.arch.value}: missing weights {missing}, unexpected {extra}")
        for name, spec in specs.items():
            if self.weights[name].shape != spec.shape:
                raise ValueError(f"{name}: shape {self.weights[name].shape} != expected {spec.shape}")
        return self

    @computed_field
    @property
    def parameter_count(self) -> int:
        return int(sum(w.size for w in self.weights.values()))

    @property
    def model_id(self) -> str:
        c, h, w = self.input_shape
        return f"{self.arch.value}-{c}x{h}x{w}-k{self.num_classes}"

    def replace_weights(self, weights: dict[str, np.ndarray]) -> "ModelParams":
        return ModelParams(
            arch=self.arch,
            weights=weights,
            num_classes=self.num_classes,
            input_shape=self.input_shape,
        )


class LabeledBatch(BaseModel):
    """A batch of images in [0,1] (N, C, H, W) with their class indices."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    images: np.ndarray
    labels: np.ndarray

    @field_validator("images", mode="before")
    @classmethod
    def check_images(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 4:
            raise ValueError(f"images must be (N, C, H, W), got {arr.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def check_labels(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.int64).reshape(-1)
        if arr.size and arr.min() < 0:
            raise ValueError("labels must be non-negative")
        return arr

    @model_validator(mode="after")
    def check_lengths(self) -> "LabeledBatch":
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images vs {len(self.labels)} labels")
        return self

    def __len__(self) -> int:
        return len(self.labels)
