"""Main orchestration: train → attack → sweep → spectrum pipelines driven by a RunConfig."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from src.attacks.runner import attack_dataset
from src.engine.errors import CheckpointError
from src.harness.datasets import Dataset, Provenance, Split, load_cifar10, synth_dataset, write_adversarial_set
from src.harness.export import write_spectrum_report, write_sweep_csv
from src.harness.models import DatasetSource, RunConfig
from src.harness.spectrum_report import ANNULUS_COUNT, clamp_sample_n, spectrum_report
from src.harness.sweeps import compare_attacks, swap_sweep
from src.nets.checkpoint import load_checkpoint, save_checkpoint
from src.nets.classifier import evaluate, init_model
from src.nets.models import ModelParams
from src.training.models import TrainConfig, TrainMode
from src.training.trainer import train, write_metrics_csv
from src.utils.config import default_scale_grid, load_settings, resolve_threads
from src.utils.logger import get_logger

logger = get_logger()


@dataclass
class CommandResult:
    """Output files and headline numbers of one command."""

    command: str
    outputs: list[Path] = field(default_factory=list)
    summary: dict[str, float | str] = field(default_factory=dict)


# --- shared steps ---


def load_split(cfg: RunConfig, split: Split) -> Dataset:
    ds = cfg.dataset
    if ds.source is DatasetSource.CIFAR10:
        data = load_cifar10(ds.path, split)
        return data.subset(ds.n_train if split is Split.TRAIN else ds.n_test)
    n = ds.n_train if split is Split.TRAIN else ds.n_test
    stream = 0 if split is Split.TRAIN else 1
    return synth_dataset([ds.seed, stream], n, ds.num_classes, ds.shape, split=split)


def evaluation_set(cfg: RunConfig) -> tuple[Dataset, bool]:
    """Test split cut to `subset`; the flag records whether it was cut."""
    test = load_split(cfg, Split.TEST)
    subset = test.subset(cfg.subset)
    return subset, len(subset) < len(test)


def load_model(cfg: RunConfig, checkpoint: Path, dataset: Dataset) -> ModelParams:
    params = load_checkpoint(checkpoint, expect_arch=cfg.arch, expect_shape=dataset.shape)
    if params.num_classes != dataset.num_classes:
        raise CheckpointError(
            f"{checkpoint}: checkpoint has {params.num_classes} classes, dataset has {dataset.num_classes}"
        )
    return params


def _threads(cfg: RunConfig) -> int:
    return resolve_threads(None, cfg.threads)


# --- commands ---


def cmd_train(cfg: RunConfig, mode: Optional[TrainMode | str] = None) -> CommandResult:
    """Train one model; writes the checkpoint and the per-epoch metrics CSV."""
    threads = _threads(cfg)
    train_cfg = cfg.train
    if mode is not None:
        train_cfg = TrainConfig.model_validate({**cfg.train.model_dump(), "mode": TrainMode(mode)})
    result = CommandResult("train")

    train_set = load_split(cfg, Split.TRAIN)
    test_set, _ = evaluation_set(cfg)
    params = init_model(cfg.arch, train_set.shape, train_set.num_classes, seed=cfg.seed)

    try:
        trained = train(params, train_set, train_cfg, threads=threads)
    except Exception as e:
        logger.error(f"Training failed: {e}")
        raise

    stem = f"{cfg.arch.value}-{train_cfg.mode.value}"
    out = Path(cfg.output_dir)
    result.outputs.append(save_checkpoint(trained.params, out / "checkpoints" / f"{stem}.ckpt"))
    result.outputs.append(write_metrics_csv(trained.metrics, out / "metrics" / f"{stem}.csv"))

    attack = cfg.attacks[0]
    clean = evaluate(trained.params, test_set, threads=threads)
    adv = attack_dataset(trained.params, test_set.images, test_set.labels, attack, threads, cfg.chunk_size)
    robust = float(np.mean(~adv.success))
    result.summary.update(clean_acc=clean, robust_acc=robust, attack=attack.label, mode=train_cfg.mode.value)
    logger.info(f"{stem}: clean acc {clean:.3f}, {attack.label} acc {robust:.3f}")
    return result


def cmd_attack(cfg: RunConfig, checkpoint: Path) -> CommandResult:
    """Generate and save the adversarial set of every configured attack."""
    threads = _threads(cfg)
    result = CommandResult("attack")
    test_set, subsampled = evaluation_set(cfg)
    params = load_model(cfg, checkpoint, test_set)
    out = Path(cfg.output_dir) / "attacks"

    clean = evaluate(params, test_set, threads=threads)
    report: dict[str, dict] = {}
    for attack in cfg.attacks:
        try:
            adv = attack_dataset(params, test_set.images, test_set.labels, attack, threads, cfg.chunk_size)
        except Exception as e:
            logger.error(f"{attack.label} attack failed: {e}")
            raise
        advset = test_set.with_images(adv.adversarial, Provenance.ADVERSARIAL)
        result.outputs.append(write_adversarial_set(advset, out / f"{attack.label}.advset"))
        report[attack.label] = {
            "clean_acc": clean,
            "robust_acc": float(np.mean(~adv.success)),
            "success_rate": adv.success_rate,
            "mean_norm": float(np.mean(adv.achieved_norm)),
            "norm": f"l{attack.norm.value}",
            "samples": len(test_set),
            "subsampled": subsampled,
        }
        result.summary[f"{attack.label}_robust_acc"] = report[attack.label]["robust_acc"]

    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    result.outputs.append(summary_path)
    result.summary["clean_acc"] = clean
    return result


def cmd_sweep(cfg: RunConfig, checkpoint: Path, kind: str = "filter") -> CommandResult:
    """Bandwidth (`filter`) or frequency-swap (`merge`) sweeps for every configured attack."""
    if kind not in ("filter", "merge"):
        raise ValueError(f"unknown sweep kind {kind!r}; expected 'filter' or 'merge'")
    threads = _threads(cfg)
    result = CommandResult("sweep")
    test_set, subsampled = evaluation_set(cfg)
    params = load_model(cfg, checkpoint, test_set)
    scales = cfg.scales or default_scale_grid()
    out = Path(cfg.output_dir) / "sweeps"

    try:
        if kind == "filter":
            sweeps = compare_attacks(
                params, test_set, cfg.attacks, scales, threads=threads, chunk_size=cfg.chunk_size, subsampled=subsampled
            )
            for label, sweep in sweeps.items():
                result.outputs.append(write_sweep_csv(sweep, out / f"filter-{label}.csv"))
                result.summary[f"{label}_peak_acc_adv"] = sweep.peak_acc_adv if sweep.peak_acc_adv is not None else "-"
                result.summary[f"{label}_final_gap"] = sweep.final_gap
        else:
            for attack in cfg.attacks:
                merged = swap_sweep(
                    params, test_set, attack, scales, threads=threads, chunk_size=cfg.chunk_size, subsampled=subsampled
                )
                for sweep in merged:
                    result.outputs.append(write_sweep_csv(sweep, out / f"{sweep.kind.value}-{attack.label}.csv"))
                result.summary[f"{attack.label}_clean_acc"] = merged[0].rows[-1].acc_nat
                result.summary[f"{attack.label}_robust_acc"] = merged[0].rows[-1].acc_adv
    except Exception as e:
        logger.error(f"{kind} sweep failed: {e}")
        raise
    return result


def cmd_spectrum(cfg: RunConfig, ckpt_std: Path, ckpt_adv: Optional[Path] = None) -> CommandResult:
    """Spectrum difference maps; without an ADV checkpoint only diff(STD − nat) is written."""
    threads = _threads(cfg)
    result = CommandResult("spectrum")
    test = load_split(cfg, Split.TEST)
    sample_n = clamp_sample_n(cfg.sample_n, test)

    params_std = load_model(cfg, ckpt_std, test)
    params_adv = load_model(cfg, ckpt_adv, test) if ckpt_adv is not None else None

    try:
        report = spectrum_report(
            params_std, params_adv, test, cfg.attacks[0], sample_n, threads, cfg.chunk_size,
            annulus_count=int(load_settings().get("spectrum", {}).get("annulus_count", ANNULUS_COUNT)),
        )
    except Exception as e:
        logger.error(f"Spectrum report failed: {e}")
        raise

    result.outputs.extend(write_spectrum_report(report, Path(cfg.output_dir) / "spectrum"))
    result.summary["sample_n"] = report.sample_n
    result.summary["std_outer_annulus"] = report.annulus_means_std[-1]
    if report.annulus_means_adv is not None:
        result.summary["adv_outer_annulus"] = report.annulus_means_adv[-1]
    return result
