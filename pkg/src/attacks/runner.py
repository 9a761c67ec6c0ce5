"""Dataset-level adversarial example generation."""

from __future__ import annotations

import logging

import numpy as np

from src.attacks.carlini import cw_l2
from src.attacks.gradient import fgsm, pgd
from src.attacks.models import AdvResult, AttackConfig, AttackKind
from src.engine.errors import EmptySetError
from src.nets.models import ModelParams
from src.utils.parallel import map_chunks

logger = logging.getLogger("freqlens")

ATTACK_CHUNK = 50


def run_attack(
    params: ModelParams,
    images: np.ndarray,
    labels: np.ndarray,
    cfg: AttackConfig,
    sample_indices=None,
) -> AdvResult:
    """Dispatch one batch to the attack named by cfg.kind."""
    if cfg.kind is AttackKind.FGSM:
        return fgsm(params, images, labels, cfg.epsilon)
    if cfg.kind is AttackKind.PGD:
        return pgd(params, images, labels, cfg, sample_indices=sample_indices)
    return cw_l2(params, images, labels, cfg, sample_indices=sample_indices)


def attack_dataset(
    params: ModelParams,
    images: np.ndarray,
    labels: np.ndarray,
    cfg: AttackConfig,
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
) -> AdvResult:
    """Attack every sample; results are independent of `threads`.

    Random starts use one RNG stream per (cfg.seed, global sample index) and
    chunk boundaries depend only on chunk_size.
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(images) == 0:
        raise EmptySetError(f"{cfg.label}: nothing to attack")

    def run(start: int, stop: int) -> AdvResult:
        return run_attack(params, images[start:stop], labels[start:stop], cfg, sample_indices=range(start, stop))

    result = AdvResult.concat(map_chunks(run, len(images), chunk_size, threads))
    logger.info(
        f"{cfg.label}: attacked {len(images)} samples, success rate {result.success_rate:.3f}, "
        f"mean norm {float(np.mean(result.achieved_norm)):.4f}"
    )
    return result
