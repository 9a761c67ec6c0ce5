"""Pydantic models for sweep tables, spectrum reports, and the JSON run document."""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationInfo,
    computed_field,
    field_validator,
    model_validator,
)

from src.attacks.models import AttackConfig
from src.nets.models import Architecture
from src.training.models import TrainConfig

ALL_PASS = math.inf


class SweepKind(str, Enum):
    FILTER = "filter"
    MERGE_ADV = "merge_adv"
    MERGE_NAT = "merge_nat"


# --- sweep tables ---


class SweepRow(BaseModel):
    """One frequency scale B/M; scale = inf is the unfiltered (all-pass) row."""

    scale: float = Field(ge=0)
    acc_adv: float = Field(ge=0, le=1)
    acc_nat: float = Field(ge=0, le=1)

    @computed_field
    @property
    def gap(self) -> float:
        return self.acc_nat - self.acc_adv

    @property
    def is_all_pass(self) -> bool:
        return math.isinf(self.scale)


class SweepResult(BaseModel):
    kind: SweepKind
    model_id: str
    attack: str
    dataset_id: str
    subsampled: bool = False
    rows: List[SweepRow]

    @field_validator("rows")
    @classmethod
    def scales_increasing(cls, rows: List[SweepRow]) -> List[SweepRow]:
        if not rows:
            raise ValueError("a sweep needs at least one row")
        for prev, cur in zip(rows, rows[1:]):
            if not cur.scale > prev.scale:
                raise ValueError(f"scales must be strictly increasing: {prev.scale} then {cur.scale}")
        return rows

    @property
    def interior(self) -> List[SweepRow]:
        """Rows strictly between the first scale and the all-pass row."""
        end = -1 if self.rows[-1].is_all_pass else len(self.rows)
        return self.rows[1:end]

    @computed_field
    @property
    def peak_scale(self) -> Optional[float]:
        inner = self.interior
        return max(inner, key=lambda r: r.acc_adv).scale if inner else None

    @computed_field
    @property
    def peak_acc_adv(self) -> Optional[float]:
        inner = self.interior
        return max(r.acc_adv for r in inner) if inner else None

    @computed_field
    @property
    def final_gap(self) -> float:
        return self.rows[-1].gap

    def metadata(self) -> Dict[str, str]:
        meta = {
            "kind": self.kind.value,
            "model": self.model_id,
            "attack": self.attack,
            "dataset": self.dataset_id,
            "subsampled": str(self.subsampled).lower(),
            "final_gap": f"{self.final_gap:.6f}",
        }
        if self.peak_scale is not None:
            meta["peak_scale"] = f"{self.peak_scale:.6f}"
            meta["peak_acc_adv"] = f"{self.peak_acc_adv:.6f}"
        return meta


# --- spectrum statistics ---


class SpectrumReport(BaseModel):
    """Centered (H, W) log-amplitude maps and their radial band summaries."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    natural: np.ndarray
    adversarial_std: np.ndarray
    diff_std: np.ndarray
    annulus_means_std: List[float]
    adversarial_adv: Optional[np.ndarray] = None
    diff_adv: Optional[np.ndarray] = None
    annulus_means_adv: Optional[List[float]] = None
    sample_n: int
    attack: str

    @property
    def single_model(self) -> bool:
        return self.diff_adv is None

    def summary(self) -> dict:
        return {
            "annulus_means_std": self.annulus_means_std,
            "annulus_means_adv": self.annulus_means_adv,
            "sample_n": self.sample_n,
            "attack": self.attack,
        }


# --- run document ---


class DatasetSource(str, Enum):
    CIFAR10 = "cifar10"
    SYNTHETIC = "synthetic"


class DatasetConfig(BaseModel):
    source: DatasetSource = DatasetSource.SYNTHETIC
    path: Optional[Path] = Field(default=None, validate_default=True)
    n_train: int = Field(default=2000, gt=0)
    n_test: int = Field(default=500, gt=0)
    num_classes: int = Field(default=4, ge=2)
    shape: tuple[int, int, int] = (3, 32, 32)
    seed: int = 0

    @field_validator("path")
    @classmethod
    def path_exists(cls, v: Optional[Path], info: ValidationInfo) -> Optional[Path]:
        if info.data.get("source") is DatasetSource.CIFAR10:
            if v is None:
                raise ValueError("required for the cifar10 source")
            if not Path(v).exists():
                raise ValueError(f"{v} does not exist")
        return v


class RunConfig(BaseModel):
    """A whole experiment: model, data, training, attacks, sweep grid, outputs.

    The master `seed` is mandatory; sub-sections without their own seed
    inherit it.
    """

    arch: Architecture = Architecture.TINY_CONVNET
    dataset: DatasetConfig = DatasetConfig()
    train: TrainConfig = TrainConfig()
    attacks: List[AttackConfig] = Field(default_factory=lambda: [AttackConfig.pgd()])
    scales: Optional[List[float]] = None
    subset: Optional[int] = Field(default=500, gt=0)
    sample_n: int = Field(default=200, gt=0)
    output_dir: Path = Path("data/runs")
    seed: int
    threads: Optional[int] = Field(default=None, ge=1)
    chunk_size: int = Field(default=50, gt=0)

    @model_validator(mode="before")
    @classmethod
    def inherit_seed(cls, data):
        if not isinstance(data, dict) or "seed" not in data:
            return data
        seed = data["seed"]
        data = dict(data)
        for section in ("dataset", "train"):
            sub = data.get(section)
            if sub is None:
                data[section] = {"seed": seed}
            elif isinstance(sub, dict) and "seed" not in sub:
                data[section] = {**sub, "seed": seed}
        if isinstance(data.get("attacks"), list):
            data["attacks"] = [
                {**a, "seed": seed} if isinstance(a, dict) and "seed" not in a else a for a in data["attacks"]
            ]
        elif "attacks" not in data:
            data["attacks"] = [{"kind": "pgd", "iterations": 20, "step_size": 1 / 255, "seed": seed}]
        return data

    @field_validator("scales")
    @classmethod
    def scales_valid(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is None:
            return v
        if not v:
            raise ValueError("scale grid must not be empty")
        if any(not math.isfinite(s) or s < 0 for s in v):
            raise ValueError("scales must be finite and >= 0 (the all-pass row is added automatically)")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("scales must be strictly increasing")
        return v

    @field_validator("attacks")
    @classmethod
    def attacks_present(cls, v: List[AttackConfig]) -> List[AttackConfig]:
        if not v:
            raise ValueError("at least one attack is required")
        return v
