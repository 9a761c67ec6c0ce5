"""Pydantic models for training configuration and results."""

from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from src.attacks.models import AttackConfig, AttackKind
from src.nets.models import ModelParams


class TrainMode(str, Enum):
    STANDARD = "standard"
    ADVERSARIAL = "adversarial"


class TrainConfig(BaseModel):
    """SGD with momentum; adversarial mode trains on PGD examples of each batch."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=20, ge=0)
    batch_size: int = Field(default=64, gt=0)
    learning_rate: float = Field(default=0.05, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    seed: int = 0
    mode: TrainMode = TrainMode.STANDARD
    inner_attack: Optional[AttackConfig] = None

    @model_validator(mode="before")
    @classmethod
    def default_inner_attack(cls, data):
        if isinstance(data, dict) and data.get("mode") in (TrainMode.ADVERSARIAL, "adversarial"):
            if data.get("inner_attack") is None:
                data = {**data, "inner_attack": AttackConfig.pgd_training(seed=int(data.get("seed", 0)))}
        return data

    @model_validator(mode="after")
    def check_inner_attack(self) -> "TrainConfig":
        if self.mode is TrainMode.ADVERSARIAL and self.inner_attack.kind is not AttackKind.PGD:
            raise ValueError(f"adversarial training needs a pgd inner_attack, got {self.inner_attack.kind.value}")
        return self


class EpochMetrics(BaseModel):
    epoch: int
    loss: float
    clean_acc: float
    robust_acc: Optional[float] = None


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: ModelParams
    metrics: List[EpochMetrics] = []

    @computed_field
    @property
    def final_clean_acc(self) -> Optional[float]:
        return self.metrics[-1].clean_acc if self.metrics else None

    @computed_field
    @property
    def final_robust_acc(self) -> Optional[float]:
        return self.metrics[-1].robust_acc if self.metrics else None
