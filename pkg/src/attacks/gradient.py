"""Sign-gradient ℓ∞ attacks: FGSM and PGD.

Both maximize the cross-entropy of the true label inside the ℓ∞ ball of
radius ε around x, intersected with the [0,1] pixel box. sign(0) = 0.
"""

from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np

from src.attacks.models import AdvResult, AttackConfig, AttackKind, Norm
from src.engine.errors import NonFiniteGradientError
from src.engine.tensor import GradTape, Tensor, grad
from src.nets.classifier import forward_logits, loss_ce, predict, weight_tensors
from src.nets.models import ModelParams

logger = logging.getLogger("freqlens")


def as_batch(image: np.ndarray, label) -> tuple[np.ndarray, np.ndarray, bool]:
    """Promote a single (C, H, W) image to a batch of one."""
    x = np.asarray(image, dtype=np.float64)
    single = x.ndim == 3
    if single:
        x = x[None]
    labels = np.atleast_1d(np.asarray(label, dtype=np.int64))
    return x, labels, single


def input_gradient(
    params: ModelParams,
    images: np.ndarray,
    labels: np.ndarray,
    weights: Mapping[str, Tensor] | None = None,
) -> np.ndarray:
    """∇_x of the summed per-sample cross-entropy (each row is that sample's own gradient)."""
    with GradTape() as tape:
        x = tape.watch(images)
        loss = loss_ce(forward_logits(params, x, weights=weights), labels, reduction="sum")
    (g,) = grad(loss, [x])
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradientError("input gradient contains NaN/Inf")
    return g


def package_result(
    params: ModelParams,
    original: np.ndarray,
    adversarial: np.ndarray,
    labels: np.ndarray,
    norm: Norm,
    single: bool,
) -> AdvResult:
    delta = adversarial - original
    flat = delta.reshape(len(delta), -1)
    if norm is Norm.LINF:
        norms = np.abs(flat).max(axis=1) if flat.shape[1] else np.zeros(len(flat))
    else:
        norms = np.sqrt((flat * flat).sum(axis=1))
    success = predict(params, adversarial) != labels
    if single:
        return AdvResult(adversarial[0], delta[0], bool(success[0]), float(norms[0]))
    return AdvResult(adversarial, delta, success, norms)


def fgsm(params: ModelParams, image: np.ndarray, label, epsilon: float) -> AdvResult:
    """adv = clamp(x + ε·sign(∇_x ℓ(f(x), y)), 0, 1)."""
    x, labels, single = as_batch(image, label)
    g = input_gradient(params, x, labels)
    adv = np.clip(x + epsilon * np.sign(g), 0.0, 1.0)
    return package_result(params, x, adv, labels, Norm.LINF, single)


def random_start(x0: np.ndarray, epsilon: float, seed: int, sample_indices: Sequence[int]) -> np.ndarray:
    """Uniform noise in [-ε, ε], one RNG stream per (seed, sample index)."""
    noise = np.empty_like(x0)
    for row, index in enumerate(sample_indices):
        rng = np.random.default_rng([seed, int(index)])
        noise[row] = rng.uniform(-epsilon, epsilon, size=x0.shape[1:])
    return noise


def pgd(
    params: ModelParams,
    image: np.ndarray,
    label,
    cfg: AttackConfig,
    sample_indices: Sequence[int] | None = None,
) -> AdvResult:
    """k steps of x ← Π_{B∞(x₀,ε) ∩ [0,1]}(x + α·sign(∇_x ℓ))."""
    if cfg.kind is not AttackKind.PGD:
        raise ValueError(f"pgd() called with a {cfg.kind.value} config")
    x0, labels, single = as_batch(image, label)
    if sample_indices is None:
        sample_indices = range(len(x0))

    lo = np.maximum(x0 - cfg.epsilon, 0.0)
    hi = np.minimum(x0 + cfg.epsilon, 1.0)

    x = x0.copy()
    if cfg.random_start and cfg.epsilon > 0:
        x = np.clip(x0 + random_start(x0, cfg.epsilon, cfg.seed, sample_indices), lo, hi)

    weights = weight_tensors(params)
    for step in range(cfg.iterations):
        g = input_gradient(params, x, labels, weights=weights)
        x = np.clip(x + cfg.step_size * np.sign(g), lo, hi)
    logger.debug(f"pgd: {len(x0)} samples, {cfg.iterations} steps, eps={cfg.epsilon:.5f}")
    return package_result(params, x0, x, labels, Norm.LINF, single)
