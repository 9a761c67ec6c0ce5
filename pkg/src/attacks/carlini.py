"""Untargeted Carlini–Wagner ℓ2 attack.

Minimizes ||δ||₂² + c·max(z_y − max_{j≠y} z_j, −κ) over w, where
x + δ = ½(tanh(w) + 1), with Adam on w. The best (lowest-norm
misclassified) iterate is kept; samples that never flip return the last
iterate. c is fixed (no binary search).
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from src.attacks.gradient import as_batch, package_result
from src.attacks.models import AdvResult, AttackConfig, AttackKind, Norm
from src.engine.errors import NonFiniteLossError
from src.engine.tensor import GradTape, Tensor, grad
from src.nets.classifier import forward_logits, weight_tensors
from src.nets.models import ModelParams

logger = logging.getLogger("freqlens")

TANH_CLIP = 1.0 - 1e-6
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


def _margins(z: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """z_y − max_{j≠y} z_j and the runner-up index per row."""
    rows = np.arange(len(z))
    others = z.copy()
    others[rows, labels] = -np.inf
    runner_up = np.argmax(others, axis=1)
    return z[rows, labels] - others[rows, runner_up], runner_up


def cw_l2(
    params: ModelParams,
    image: np.ndarray,
    label,
    cfg: AttackConfig,
    sample_indices: Sequence[int] | None = None,
) -> AdvResult:
    if cfg.kind is not AttackKind.CW:
        raise ValueError(f"cw_l2() called with a {cfg.kind.value} config")
    x0, labels, single = as_batch(image, label)
    rows = np.arange(len(x0))
    reduce_axes = tuple(range(1, x0.ndim))

    w = np.arctanh(np.clip(2.0 * x0 - 1.0, -TANH_CLIP, TANH_CLIP))
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    beta1, beta2 = ADAM_BETAS

    best = x0.copy()
    best_norm = np.full(len(x0), np.inf)
    weights = weight_tensors(params)

    # the iterate is scored before every update, so step 0 scores the start point
    for step in range(cfg.cw_steps + 1):
        tw = np.tanh(w)
        x_adv = 0.5 * (tw + 1.0)
        with GradTape() as tape:
            xt = tape.watch(x_adv)
            logits = forward_logits(params, xt, weights=weights)
            z = logits.data

            margin, runner_up = _margins(z, labels)
            delta = x_adv - x0
            l2sq = (delta * delta).sum(axis=reduce_axes)
            objective = l2sq + cfg.cw_c * np.maximum(margin, -cfg.cw_kappa)
            if not np.all(np.isfinite(objective)):
                raise NonFiniteLossError(f"C&W objective became non-finite at step {step}")

            flipped = np.argmax(z, axis=1) != labels
            norms = np.sqrt(l2sq)
            improved = flipped & (norms < best_norm)
            best[improved] = x_adv[improved]
            best_norm[improved] = norms[improved]

            if step == cfg.cw_steps:
                break

            # hinge term: c·(z_y − z_j) for rows where the margin is still above −κ
            active = margin > -cfg.cw_kappa
            coeff = np.zeros_like(z)
            coeff[rows, labels] = cfg.cw_c * active
            coeff[rows, runner_up] = -cfg.cw_c * active
            hinge = (logits * Tensor(coeff)).sum()

        g_x = 2.0 * delta
        if active.any():
            (g_logits,) = grad(hinge, [xt])
            g_x = g_x + g_logits
        g_w = g_x * 0.5 * (1.0 - tw * tw)

        t = step + 1
        m = beta1 * m + (1 - beta1) * g_w
        v = beta2 * v + (1 - beta2) * g_w * g_w
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        w = w - cfg.cw_lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

    adv = np.where(np.isfinite(best_norm)[:, None, None, None], best, x_adv)
    adv = np.clip(adv, 0.0, 1.0)
    logger.debug(f"cw_l2: {int(np.isfinite(best_norm).sum())}/{len(x0)} flipped in {cfg.cw_steps} steps")
    return package_result(params, x0, adv, labels, Norm.L2, single)
