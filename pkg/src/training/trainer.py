"""Standard and adversarial (min-max) training loops."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.attacks.gradient import pgd
from src.engine.errors import EmptySetError, ShapeMismatchError, TrainingDivergedError
from src.engine.tensor import GradTape, grad
from src.nets.classifier import evaluate, forward_logits, loss_ce
from src.nets.models import ModelParams
from src.training.models import EpochMetrics, TrainConfig, TrainMode, TrainResult

logger = logging.getLogger("freqlens")

METRIC_COLUMNS = ["epoch", "loss", "clean_acc", "robust_acc"]


def _check_dataset(params: ModelParams, dataset: Any) -> tuple[np.ndarray, np.ndarray]:
    images = np.asarray(dataset.images, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    if len(labels) == 0:
        raise EmptySetError("train: dataset is empty")
    if tuple(images.shape[1:]) != params.input_shape:
        raise ShapeMismatchError("train", f"images {images.shape[1:]} vs model input {params.input_shape}")
    return images, labels


def parameter_gradients(
    params: ModelParams,
    weights: dict[str, np.ndarray],
    images: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, np.ndarray, dict[str, np.ndarray]]:
    """Mean cross-entropy of one batch, its logits, and ∂loss/∂θ for every weight."""
    with GradTape() as tape:
        tracked = {name: tape.watch(w) for name, w in weights.items()}
        logits = forward_logits(params, images, weights=tracked)
        loss = loss_ce(logits, labels)
    names = list(tracked)
    grads = grad(loss, [tracked[n] for n in names])
    return loss.item(), logits.data, dict(zip(names, grads))


def train(
    params: ModelParams,
    dataset: Any,
    cfg: TrainConfig,
    threads: int = 1,
) -> TrainResult:
    """Minimize cross-entropy with SGD + momentum (v ← μv + g; θ ← θ − ηv).

    Adversarial mode replaces each batch by its PGD examples against the
    current weights before the update. Batch order for epoch e is a
    permutation drawn from default_rng([seed, e]); the dataset is never
    modified.
    """
    if cfg.epochs == 0:
        return TrainResult(params=params)

    images, labels = _check_dataset(params, dataset)
    n = len(labels)
    weights = {name: w.copy() for name, w in params.weights.items()}
    velocity = {name: np.zeros_like(w) for name, w in weights.items()}
    adversarial = cfg.mode is TrainMode.ADVERSARIAL

    logger.info(
        f"Training {params.model_id} ({cfg.mode.value}): {cfg.epochs} epochs, "
        f"batch {cfg.batch_size}, lr {cfg.learning_rate}, {n} samples"
    )

    metrics: list[EpochMetrics] = []
    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        loss_sum = 0.0
        robust_correct = 0

        for batch, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            x, y = images[idx], labels[idx]

            if adversarial:
                current = params.replace_weights(weights)
                x = pgd(current, x, y, cfg.inner_attack, sample_indices=epoch * n + idx).adversarial

            loss, logits, grads = parameter_gradients(params, weights, x, y)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch, loss)
            loss_sum += loss * len(idx)
            if adversarial:
                robust_correct += int(np.sum(np.argmax(logits, axis=1) == y))

            for name in weights:
                velocity[name] = cfg.momentum * velocity[name] + grads[name]
                weights[name] = weights[name] - cfg.learning_rate * velocity[name]

        current = params.replace_weights(weights)
        row = EpochMetrics(
            epoch=epoch,
            loss=loss_sum / n,
            clean_acc=evaluate(current, dataset, threads=threads),
            robust_acc=robust_correct / n if adversarial else None,
        )
        metrics.append(row)
        robust = f", robust acc {row.robust_acc:.3f}" if row.robust_acc is not None else ""
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: loss {row.loss:.4f}, clean acc {row.clean_acc:.3f}{robust}")

    return TrainResult(params=params.replace_weights(weights), metrics=metrics)


def write_metrics_csv(metrics: list[EpochMetrics], path: Path) -> Path:
    """One row per epoch: epoch, loss, clean_acc, robust_acc (blank in standard mode)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame([m.model_dump() for m in metrics], columns=METRIC_COLUMNS)
    df.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    return path
