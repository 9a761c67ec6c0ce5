"""Write sweep tables and spectrum reports to disk.

All artifacts are pure functions of their inputs (no timestamps), so
identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import pandas as pd

from src.harness.models import SpectrumReport, SweepResult
from src.spectral.export import write_float_image, write_grid_csv

SWEEP_COLUMNS = ["scale", "acc_adv", "acc_nat", "gap"]


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in result.rows], columns=SWEEP_COLUMNS)


def write_sweep_csv(result: SweepResult, path: Path) -> Path:
    """`# key=value` metadata lines, then `scale,acc_adv,acc_nat,gap` rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in result.metadata().items():
            f.write(f"# {key}={value}\n")
        sweep_frame(result).to_csv(f, index=False, float_format="%.6f", lineterminator="\n")
    return path


def read_sweep_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_spectrum_report(report: SpectrumReport, out_dir: Path) -> list[Path]:
    """CSV grids and float TIFFs for each map, plus summary.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maps = {"natural": report.natural, "adversarial_std": report.adversarial_std, "diff_std": report.diff_std}
    if not report.single_model:
        maps["adversarial_adv"] = report.adversarial_adv
        maps["diff_adv"] = report.diff_adv

    paths = []
    for name, grid in maps.items():
        paths.append(write_grid_csv(grid, out_dir / f"{name}.csv"))
        paths.append(write_float_image(grid, out_dir / f"{name}.tiff"))

    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(summary_path)
    return paths
