"""Classifier operations: init, forward, loss, prediction, accuracy."""

from __future__ import annotations

import logging
from typing import Any, Mapping

import numpy as np

from src.engine.errors import EmptySetError, InvalidShapeError, ShapeMismatchError
from src.engine.tensor import Tensor, forward_op
from src.nets.architectures import FORWARD, initial_weights, weight_specs
from src.nets.models import Architecture, LabeledBatch, ModelParams
from src.utils.parallel import map_chunks

logger = logging.getLogger("freqlens")

EVAL_CHUNK = 256


def init_model(
    arch: Architecture | str,
    input_shape: tuple[int, int, int],
    num_classes: int,
    seed: int,
) -> ModelParams:
    """Deterministic fresh parameters for `arch` (same seed → bit-identical weights)."""
    arch = Architecture(arch)
    input_shape = tuple(int(d) for d in input_shape)
    specs = weight_specs(arch, input_shape, num_classes)
    params = ModelParams(
        arch=arch,
        weights=initial_weights(specs, seed),
        num_classes=num_classes,
        input_shape=input_shape,
    )
    logger.debug(f"init_model {params.model_id}: {params.parameter_count} parameters (seed={seed})")
    return params


def weight_tensors(params: ModelParams) -> dict[str, Tensor]:
    """Constant (untracked) tensors for every weight."""
    return {name: Tensor(w) for name, w in params.weights.items()}


def _images_of(batch: Any) -> Tensor:
    if isinstance(batch, Tensor):
        return batch
    if isinstance(batch, LabeledBatch):
        return Tensor(batch.images)
    return Tensor(np.asarray(batch, dtype=np.float64))


def forward_logits(
    params: ModelParams,
    batch: LabeledBatch | Tensor | np.ndarray,
    weights: Mapping[str, Tensor] | None = None,
    position_embeddings: bool = True,
) -> Tensor:
    """Logits (N, num_classes). Pass tracked `weights` to differentiate w.r.t. parameters."""
    x = _images_of(batch)
    if x.ndim != 4 or tuple(x.shape[1:]) != params.input_shape:
        raise ShapeMismatchError(
            "forward_logits", f"images {x.shape} do not match input shape {params.input_shape}"
        )
    if weights is None:
        weights = weight_tensors(params)
    return FORWARD[params.arch](weights, x, position_embeddings=position_embeddings)


def loss_ce(logits: Tensor, labels: np.ndarray, reduction: str = "mean") -> Tensor:
    """Softmax cross-entropy, averaged (or summed) over the batch."""
    return forward_op("softmax_cross_entropy", [logits], {"labels": np.asarray(labels, dtype=np.int64), "reduction": reduction})


def predict(
    params: ModelParams,
    images: np.ndarray,
    threads: int = 1,
    chunk_size: int = EVAL_CHUNK,
) -> np.ndarray:
    """Argmax class per image; ties go to the lowest class index."""
    images = np.asarray(images, dtype=np.float64)
    if len(images) == 0:
        return np.zeros(0, dtype=np.int64)
    weights = weight_tensors(params)

    def run(start: int, stop: int) -> np.ndarray:
        logits = forward_logits(params, images[start:stop], weights=weights)
        return np.argmax(logits.data, axis=1)

    return np.concatenate(map_chunks(run, len(images), chunk_size, threads)).astype(np.int64)


def evaluate(params: ModelParams, dataset: Any, threads: int = 1) -> float:
    """Accuracy = correct / total over anything with `.images` and `.labels`."""
    labels = np.asarray(dataset.labels, dtype=np.int64)
    if len(labels) == 0:
        raise EmptySetError("evaluate: dataset is empty")
    if labels.max() >= params.num_classes:
        raise InvalidShapeError(f"label {labels.max()} out of range for {params.num_classes} classes")
    predictions = predict(params, dataset.images, threads=threads)
    return float(np.mean(predictions == labels))
