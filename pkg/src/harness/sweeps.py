"""Accuracy-vs-bandwidth sweeps over low-pass filtered and frequency-swapped images.

The adversarial set is generated once against the unfiltered model; every
scale then filters (or merges) that fixed set. Bandwidth B = scale·H, so
scale 1.0 is the circle tangent to the image edge.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from src.attacks.models import AttackConfig
from src.attacks.runner import ATTACK_CHUNK, attack_dataset
from src.harness.datasets import Dataset
from src.harness.models import ALL_PASS, SweepKind, SweepResult, SweepRow
from src.nets.classifier import predict
from src.nets.models import ModelParams
from src.spectral.filters import apply_lowpass, merge_frequencies
from src.utils.parallel import map_chunks

logger = logging.getLogger("freqlens")

ProgressCallback = Callable[[str, float], None]


def _accuracy(params: ModelParams, images: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(predict(params, images) == labels))


def _check_scales(scales: Sequence[float]) -> list[float]:
    scales = [float(s) for s in scales]
    if not scales:
        raise ValueError("scale grid must not be empty")
    if any(s < 0 or not math.isfinite(s) for s in scales):
        raise ValueError(f"scales must be finite and >= 0, got {scales}")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError(f"scales must be strictly increasing, got {scales}")
    return scales


def _per_scale(fn: Callable[[float], SweepRow], scales: list[float], threads: int) -> list[SweepRow]:
    """One row per scale, assembled in scale order whatever the thread count."""
    return [row for chunk in map_chunks(lambda a, b: [fn(s) for s in scales[a:b]], len(scales), 1, threads) for row in chunk]


def generate_adversarial(
    params: ModelParams,
    dataset: Dataset,
    attack_cfg: AttackConfig,
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
) -> np.ndarray:
    return attack_dataset(params, dataset.images, dataset.labels, attack_cfg, threads, chunk_size).adversarial


def bandwidth_sweep(
    params: ModelParams,
    dataset: Dataset,
    attack_cfg: AttackConfig,
    scales: Sequence[float],
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
    adversarial: Optional[np.ndarray] = None,
    subsampled: bool = False,
    progress_callback: Optional[ProgressCallback] = None,
) -> SweepResult:
    """
    Accuracy on low-pass filtered adversarial and natural images for each scale.

    Args:
        params: Model under attack (also the evaluator)
        dataset: Evaluation set (already subsampled by the caller)
        attack_cfg: Attack used to build the adversarial set
        scales: Strictly increasing B/M values, each >= 0
        adversarial: Pre-computed adversarial images to reuse
        subsampled: Recorded in the result metadata

    Returns:
        SweepResult of kind `filter`, ending with the all-pass row
    """
    scales = _check_scales(scales)
    h = dataset.shape[1]
    nat, labels = dataset.images, dataset.labels

    if adversarial is None:
        if progress_callback:
            progress_callback(f"Generating {attack_cfg.label} adversarial set", 0.0)
        adversarial = generate_adversarial(params, dataset, attack_cfg, threads, chunk_size)

    def row(scale: float) -> SweepRow:
        b = scale * h
        return SweepRow(
            scale=scale,
            acc_adv=_accuracy(params, apply_lowpass(adversarial, b), labels),
            acc_nat=_accuracy(params, apply_lowpass(nat, b), labels),
        )

    if progress_callback:
        progress_callback(f"Filtering at {len(scales)} scales", 0.5)
    rows = _per_scale(row, scales, threads)
    rows.append(SweepRow(scale=ALL_PASS, acc_adv=_accuracy(params, adversarial, labels), acc_nat=_accuracy(params, nat, labels)))

    result = SweepResult(
        kind=SweepKind.FILTER,
        model_id=params.model_id,
        attack=attack_cfg.label,
        dataset_id=dataset.dataset_id,
        subsampled=subsampled,
        rows=rows,
    )
    logger.info(
        f"filter sweep ({attack_cfg.label}): clean {rows[-1].acc_nat:.3f}, robust {rows[-1].acc_adv:.3f}, "
        f"peak {result.peak_acc_adv} at scale {result.peak_scale}"
    )
    return result


def swap_sweep(
    params: ModelParams,
    dataset: Dataset,
    attack_cfg: AttackConfig,
    scales: Sequence[float],
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
    adversarial: Optional[np.ndarray] = None,
    subsampled: bool = False,
) -> tuple[SweepResult, SweepResult]:
    """Frequency-swap sweeps: (merge_adv, merge_nat).

    merge_adv keeps the adversarial spectrum inside B and the natural one
    outside; its acc_nat column is the clean-accuracy reference. merge_nat
    is the mirror, with the robust accuracy as its acc_adv reference.
    """
    scales = _check_scales(scales)
    h = dataset.shape[1]
    nat, labels = dataset.images, dataset.labels
    if adversarial is None:
        adversarial = generate_adversarial(params, dataset, attack_cfg, threads, chunk_size)

    clean = _accuracy(params, nat, labels)
    robust = _accuracy(params, adversarial, labels)

    def merge_adv_row(scale: float) -> SweepRow:
        merged = merge_frequencies(adversarial, nat, scale * h)
        return SweepRow(scale=scale, acc_adv=_accuracy(params, merged, labels), acc_nat=clean)

    def merge_nat_row(scale: float) -> SweepRow:
        merged = merge_frequencies(nat, adversarial, scale * h)
        return SweepRow(scale=scale, acc_adv=robust, acc_nat=_accuracy(params, merged, labels))

    adv_rows = _per_scale(merge_adv_row, scales, threads)
    adv_rows.append(SweepRow(scale=ALL_PASS, acc_adv=robust, acc_nat=clean))
    nat_rows = _per_scale(merge_nat_row, scales, threads)
    nat_rows.append(SweepRow(scale=ALL_PASS, acc_adv=robust, acc_nat=clean))

    common = dict(model_id=params.model_id, attack=attack_cfg.label, dataset_id=dataset.dataset_id, subsampled=subsampled)
    logger.info(f"merge sweeps ({attack_cfg.label}): clean {clean:.3f}, robust {robust:.3f}")
    return (
        SweepResult(kind=SweepKind.MERGE_ADV, rows=adv_rows, **common),
        SweepResult(kind=SweepKind.MERGE_NAT, rows=nat_rows, **common),
    )


def compare_attacks(
    params: ModelParams,
    dataset: Dataset,
    attack_cfgs: Sequence[AttackConfig],
    scales: Sequence[float],
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
    subsampled: bool = False,
) -> dict[str, SweepResult]:
    """Filter sweeps of several attacks on the same evaluation set, keyed by attack label."""
    results: dict[str, SweepResult] = {}
    for cfg in attack_cfgs:
        if cfg.label in results:
            raise ValueError(f"duplicate attack label {cfg.label!r}")
        results[cfg.label] = bandwidth_sweep(
            params, dataset, cfg, scales, threads=threads, chunk_size=chunk_size, subsampled=subsampled
        )
    return results
