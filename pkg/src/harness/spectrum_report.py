"""Average log-amplitude spectra of natural vs. adversarial sets."""

from __future__ import annotations

import logging
from typing import Optional

from src.attacks.models import AttackConfig
from src.attacks.runner import ATTACK_CHUNK
from src.harness.datasets import Dataset
from src.harness.models import SpectrumReport
from src.harness.sweeps import generate_adversarial
from src.nets.models import ModelParams
from src.spectral.statistics import annulus_means, mean_log_amplitude

logger = logging.getLogger("freqlens")

ANNULUS_COUNT = 4


def clamp_sample_n(sample_n: int, dataset: Dataset) -> int:
    if sample_n > len(dataset):
        logger.warning(f"sample_n {sample_n} exceeds dataset size {len(dataset)}; using {len(dataset)}")
        return len(dataset)
    return sample_n


def spectrum_report(
    params_std: ModelParams,
    params_adv: Optional[ModelParams],
    dataset: Dataset,
    attack_cfg: AttackConfig,
    sample_n: int,
    threads: int = 1,
    chunk_size: int = ATTACK_CHUNK,
    annulus_count: int = ANNULUS_COUNT,
) -> SpectrumReport:
    """diff(STD − nat) and, when an adversarially trained model is given, diff(ADV − nat).

    Without `params_adv` the report runs in single-model mode and carries
    only the STD map.
    """
    sample = dataset.subset(clamp_sample_n(sample_n, dataset))
    natural = mean_log_amplitude(sample.images)

    adv_images = generate_adversarial(params_std, sample, attack_cfg, threads, chunk_size)
    adversarial_std = mean_log_amplitude(adv_images)
    diff_std = adversarial_std - natural
    report = {
        "natural": natural,
        "adversarial_std": adversarial_std,
        "diff_std": diff_std,
        "annulus_means_std": annulus_means(diff_std, annulus_count),
        "sample_n": len(sample),
        "attack": attack_cfg.label,
    }

    if params_adv is not None:
        adv_images = generate_adversarial(params_adv, sample, attack_cfg, threads, chunk_size)
        adversarial_adv = mean_log_amplitude(adv_images)
        diff_adv = adversarial_adv - natural
        report.update(
            adversarial_adv=adversarial_adv,
            diff_adv=diff_adv,
            annulus_means_adv=annulus_means(diff_adv, annulus_count),
        )
    else:
        logger.info("No adversarially trained model given; reporting diff(STD - nat) only")

    result = SpectrumReport(**report)
    logger.info(f"Spectrum report on {len(sample)} images: STD annuli {[round(v, 4) for v in result.annulus_means_std]}")
    return result
