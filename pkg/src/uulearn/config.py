"""JSON experiment configuration, validated with pydantic before any run."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, UULearnError
from .losses import get_loss
from .optim import TrainConfig
from .rewrite import PriorTriple

__all__ = [
    "METHODS",
    "MixtureData",
    "CsvData",
    "ModelBlock",
    "TrainBlock",
    "SweepBlock",
    "ExperimentConfig",
    "load_config",
    "parse_config",
]

METHODS = ("uu", "uu_biased", "ber_fc", "ccn", "oracle_pn", "small_pn", "small_pn_prior_shift")
Method = Literal["uu", "uu_biased", "ber_fc", "ccn", "oracle_pn", "small_pn", "small_pn_prior_shift"]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _PriorsMixin(_Block):
    pi: float
    theta: float
    theta_prime: float
    n: int = Field(ge=1)
    n_prime: int = Field(ge=1)
    n_val: int = Field(default=0, ge=0, description="validation points per unlabeled set")

    @model_validator(mode="after")
    def _priors_valid(self):
        try:
            PriorTriple(self.pi, self.theta, self.theta_prime)
        except UULearnError as exc:
            raise ValueError(str(exc)) from None
        return self


class MixtureData(_PriorsMixin):
    kind: Literal["mixture"] = "mixture"
    mean_pos: list[float] = [1.0, 1.0]
    mean_neg: list[float] = [-1.0, -1.0]
    sigma: float = Field(default=1.0, gt=0)
    n_test: int = Field(default=10000, ge=1)

    @model_validator(mode="after")
    def _dims(self):
        if len(self.mean_pos) != len(self.mean_neg) or not self.mean_pos:
            raise ValueError("mean_pos and mean_neg must be non-empty and equally long")
        return self


class CsvData(_PriorsMixin):
    """CSV-backed data and a labeled test file.

    Either ``pool`` names a labeled file from which the two unlabeled sets
    (and the labeled baselines) are drawn, or ``u1``/``u2`` name unlabeled
    files used as-is (their first ``n``/``n_prime`` rows).
    """

    kind: Literal["csv"]
    test: str
    pool: Optional[str] = None
    u1: Optional[str] = None
    u2: Optional[str] = None

    @model_validator(mode="after")
    def _sources(self):
        unlabeled = self.u1 is not None or self.u2 is not None
        if (self.pool is None) == (not unlabeled) or (unlabeled and (self.u1 is None or self.u2 is None)):
            raise ValueError("give either pool, or both u1 and u2")
        return self


class ModelBlock(_Block):
    kind: Literal["linear", "mlp"] = "linear"
    hidden: list[int] = [64, 64, 64]

    @field_validator("hidden")
    @classmethod
    def _positive(cls, v):
        if any(h < 1 for h in v):
            raise ValueError("hidden widths must be positive")
        return v


class TrainBlock(_Block):
    optimizer: Literal["sgd", "adam"] = "sgd"
    initial_lr: float = Field(default=0.01, gt=0)
    decay: float = Field(default=0.0, ge=0)
    batch_size: int = Field(default=128, ge=1)
    epochs: int = Field(default=500, ge=0)
    weight_decay: float = Field(default=0.0, ge=0)
    loss: str = "sigmoid"
    estimator: Literal["uu", "uu_sym"] = "uu"

    @field_validator("loss")
    @classmethod
    def _known_loss(cls, v):
        spec = get_loss(v)
        if not spec.has_gradient:
            raise ValueError(f"{v} loss cannot be used for training")
        return spec.name

    def to_train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(seed=seed, **self.model_dump())


class SweepBlock(_Block):
    theta_prime: Optional[list[float]] = None
    eps_pairs: Optional[list[tuple[float, float]]] = None
    n: Optional[list[int]] = None
    n_prime_follows_n: bool = True
    reference_scale: int = Field(default=100, ge=1)


class ExperimentConfig(_Block):
    data: Union[MixtureData, CsvData] = Field(discriminator="kind")
    method: Method = "uu"
    methods: list[Method] = ["uu", "uu_biased", "ber_fc", "ccn", "oracle_pn"]
    model: ModelBlock = ModelBlock()
    train: TrainBlock = TrainBlock()
    sweep: SweepBlock = SweepBlock()
    seeds: list[int] = Field(default_factory=lambda: list(range(10)), min_length=1)
    perturbation: Optional[tuple[float, float]] = None
    out: str = "runs"

    @model_validator(mode="after")
    def _symmetric_for_uu_sym(self):
        if self.train.estimator == "uu_sym" and not get_loss(self.train.loss).symmetric:
            raise ValueError("estimator uu_sym needs a symmetric loss")
        return self

    def updated(self, **changes) -> "ExperimentConfig":
        """Copy with dotted-path overrides (``data.theta_prime=0.3``), re-validated."""
        doc = self.model_dump()
        for path, value in changes.items():
            node = doc
            *parents, leaf = path.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        return parse_config(doc)


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(doc)
