"""Pydantic models for attack configuration, plus the AdvResult container."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class AttackKind(str, Enum):
    FGSM = "fgsm"
    PGD = "pgd"
    CW = "cw"


class Norm(str, Enum):
    LINF = "inf"
    L2 = "2"


class AttackConfig(BaseModel):
    """One attack: kind, budget, and optimizer knobs. Pixel units (8/255 = 8 grey levels)."""

    model_config = ConfigDict(frozen=True)

    kind: AttackKind
    epsilon: float = Field(default=8 / 255, ge=0)
    norm: Norm | None = None
    step_size: float = Field(default=1 / 255, gt=0)
    iterations: int = Field(default=20, ge=0)
    random_start: bool = True
    cw_c: float = Field(default=100.0, gt=0)
    cw_kappa: float = Field(default=0.0, ge=0)
    cw_steps: int = Field(default=200, ge=0)
    cw_lr: float = Field(default=0.01, gt=0)
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def default_norm(cls, data):
        if isinstance(data, dict) and data.get("norm") is None and "kind" in data:
            kind = AttackKind(data["kind"])
            data = {**data, "norm": Norm.L2 if kind is AttackKind.CW else Norm.LINF}
        return data

    @model_validator(mode="after")
    def check_norm(self) -> "AttackConfig":
        expected = Norm.L2 if self.kind is AttackKind.CW else Norm.LINF
        if self.norm is not expected:
            raise ValueError(f"{self.kind.value} attacks use the l{expected.value} norm, got l{self.norm.value}")
        return self

    @property
    def label(self) -> str:
        if self.kind is AttackKind.PGD:
            return f"pgd{self.iterations}"
        return self.kind.value

    @classmethod
    def fgsm(cls, epsilon: float = 8 / 255, **kw) -> "AttackConfig":
        return cls(kind=AttackKind.FGSM, epsilon=epsilon, **kw)

    @classmethod
    def pgd(cls, iterations: int = 20, step_size: float = 1 / 255, epsilon: float = 8 / 255, **kw) -> "AttackConfig":
        return cls(kind=AttackKind.PGD, iterations=iterations, step_size=step_size, epsilon=epsilon, **kw)

    @classmethod
    def cw(cls, c: float = 100.0, kappa: float = 0.0, **kw) -> "AttackConfig":
        return cls(kind=AttackKind.CW, cw_c=c, cw_kappa=kappa, **kw)

    @classmethod
    def pgd_training(cls, seed: int = 0) -> "AttackConfig":
        """Inner maximization for adversarial training: PGD-10, step 2/255, ε = 8/255."""
        return cls.pgd(iterations=10, step_size=2 / 255, epsilon=8 / 255, seed=seed)


@dataclass(frozen=True)
class AdvResult:
    """Adversarial images with per-sample bookkeeping.

    Batched results hold (N, C, H, W) images and (N,) success/norm arrays;
    single-image results hold (C, H, W) and scalars.
    """

    adversarial: np.ndarray
    perturbation: np.ndarray
    success: np.ndarray | bool
    achieved_norm: np.ndarray | float

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.success))

    @staticmethod
    def concat(parts: list["AdvResult"]) -> "AdvResult":
        return AdvResult(
            adversarial=np.concatenate([p.adversarial for p in parts]),
            perturbation=np.concatenate([p.perturbation for p in parts]),
            success=np.concatenate([np.atleast_1d(p.success) for p in parts]),
            achieved_norm=np.concatenate([np.atleast_1d(p.achieved_norm) for p in parts]),
        )
