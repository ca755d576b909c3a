"""Minibatch training on the corrected risk of two unlabeled sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AbortedRunError, ConfigError, EmptySampleError, ShapeError, UnsupportedLossError
from .estimators import (
    LabeledSet,
    corrected_risk,
    empirical_risk_uu,
    zero_one_test_error,
)
from .losses import LossSpec, get_loss
from .models import score_gradients
from .rewrite import CorrectionCoefficients, CostWeights, PriorTriple, correction_coefficients, cost_weights

__all__ = [
    "TrainConfig",
    "TrainHistory",
    "Objective",
    "lr_at_epoch",
    "train",
    "select_model",
    "DECAY_GRID",
]

DECAY_GRID = (0.0, 1e-6, 1e-5, 5e-5, 1e-4, 5e-4)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "sgd"
    initial_lr: float = 0.01
    decay: float = 0.0
    batch_size: int = 128
    epochs: int = 100
    weight_decay: float = 0.0
    seed: int = 0
    loss: LossSpec = field(default_factory=lambda: get_loss("sigmoid"))
    estimator: str = "uu"

    def __post_init__(self):
        object.__setattr__(self, "loss", get_loss(self.loss))
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be sgd or adam, got {self.optimizer!r}")
        if self.estimator not in ("uu", "uu_sym"):
            raise ConfigError(f"estimator must be uu or uu_sym, got {self.estimator!r}")
        for name in ("initial_lr", "decay", "weight_decay"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0 or (name == "initial_lr" and v == 0):
                raise ConfigError(f"invalid {name}: {v}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be nonnegative")
        if self.estimator == "uu_sym" and not self.loss.symmetric:
            raise UnsupportedLossError(f"uu_sym needs a symmetric loss, got {self.loss.name}")


@dataclass(frozen=True)
class Objective:
    """What gets minimized: corrected-loss weights plus per-set averaging weights."""

    weights: CorrectionCoefficients | CostWeights
    set_weights: tuple = (1.0, 1.0)

    @classmethod
    def for_priors(cls, priors: PriorTriple, estimator: str = "uu") -> "Objective":
        if estimator == "uu_sym":
            return cls(cost_weights(priors))
        return cls(correction_coefficients(priors))

    def risk(self, scores1, scores2, loss) -> float:
        return corrected_risk(scores1, scores2, self.weights, loss, self.set_weights)


@dataclass
class TrainHistory:
    epoch: list = field(default_factory=list)
    train_risk: list = field(default_factory=list)
    val_risk: list = field(default_factory=list)
    test_error: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    negative_risk_epochs: int = 0
    negative_batches: int = 0
    steps: int = 0

    COLUMNS = ("epoch", "train_risk", "val_risk", "test_error", "lr")

    def rows(self):
        return list(zip(*(getattr(self, c) for c in self.COLUMNS)))

    def to_dict(self) -> dict:
        doc = {c: list(getattr(self, c)) for c in self.COLUMNS}
        doc.update(
            negative_risk_epochs=self.negative_risk_epochs,
            negative_batches=self.negative_batches,
            steps=self.steps,
        )
        return doc

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in self.rows():
                writer.writerow(["" if v is None else repr(v) for v in row])


def lr_at_epoch(initial_lr: float, decay: float, epoch: int) -> float:
    """Inverse-time decay: initial_lr / (1 + decay * epoch)."""
    if epoch < 0:
        raise ConfigError("epoch must be nonnegative")
    return initial_lr / (1.0 + decay * epoch)


class _WrappingSampler:
    """Yields indices from successive seeded permutations, reshuffling when exhausted."""

    def __init__(self, n, rng):
        self.n, self.rng = n, rng
        self.perm = rng.permutation(n)
        self.pos = 0

    def take(self, k):
        out = []
        while k > 0:
            if self.pos == self.n:
                self.perm = self.rng.permutation(self.n)
                self.pos = 0
            chunk = self.perm[self.pos:self.pos + k]
            self.pos += len(chunk)
            k -= len(chunk)
            out.append(chunk)
        return np.concatenate(out)


def _features(data):
    X = getattr(data, "features", data)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise EmptySampleError("training sets must be non-empty matrices")
    return X


def train(
    model,
    u1,
    u2,
    priors: PriorTriple,
    cfg: TrainConfig,
    validation=None,
    test: LabeledSet | None = None,
    objective: Objective | None = None,
):
    """Minimize the corrected empirical risk of ``(u1, u2)``; return ``(model, history)``.

    The input model is not modified. Each step takes one minibatch of equal
    size from each set; an epoch is one pass over the larger set while the
    smaller one reshuffles and wraps. ``validation`` is an optional pair of
    unlabeled sets scored with the unbiased estimator under ``priors``.
    ``objective`` overrides the default objective built from ``priors`` and
    ``cfg.estimator`` (baselines use this).
    """
    loss = cfg.loss
    if not loss.has_gradient:
        raise UnsupportedLossError(f"{loss.name} loss cannot be trained with gradients")
    if objective is None:
        objective = Objective.for_priors(priors, cfg.estimator)
    u1, u2 = priors.orient(u1, u2)
    X1, X2 = _features(u1), _features(u2)
    if X1.shape[1] != model.input_dim or X2.shape[1] != model.input_dim:
        raise ShapeError("training features do not match the model input dimension")

    model = model.copy()
    params = model.params
    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    first_is_big = len(X1) >= len(X2)
    n_big = max(len(X1), len(X2))
    wrap = _WrappingSampler(min(len(X1), len(X2)), rng)
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    t = 0

    for epoch in range(cfg.epochs):
        lr = lr_at_epoch(cfg.initial_lr, cfg.decay, epoch)
        perm = rng.permutation(n_big)
        for start in range(0, n_big, cfg.batch_size):
            idx_big = perm[start:start + cfg.batch_size]
            idx_small = wrap.take(len(idx_big))
            i1, i2 = (idx_big, idx_small) if first_is_big else (idx_small, idx_big)
            B1, B2 = X1[i1], X2[i2]
            s1, s2 = model.forward(B1), model.forward(B2)
            if objective.risk(s1, s2, loss) < 0:
                history.negative_batches += 1
            g1, g2 = score_gradients(s1, s2, objective.weights, loss, objective.set_weights)
            grad = model.backward(B1, g1) + model.backward(B2, g2)
            if cfg.weight_decay:
                grad = grad + cfg.weight_decay * params
            if not np.all(np.isfinite(grad)):
                raise AbortedRunError("non-finite gradient", epoch)
            t += 1
            if cfg.optimizer == "adam":
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * grad
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * grad * grad
                m_hat = m / (1.0 - ADAM_BETA1**t)
                v_hat = v / (1.0 - ADAM_BETA2**t)
                params -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
            else:
                params -= lr * grad
            if not np.all(np.isfinite(params)):
                raise AbortedRunError("parameters overflowed", epoch)
        history.steps = t

        train_risk = objective.risk(model.forward(X1), model.forward(X2), loss)
        if not math.isfinite(train_risk):
            raise AbortedRunError("non-finite training risk", epoch)
        if train_risk < 0:
            history.negative_risk_epochs += 1
        val_risk = None
        if validation is not None:
            val_risk = empirical_risk_uu(model, validation[0], validation[1], priors, loss).value
        test_err = zero_one_test_error(model, test).value if test is not None else None
        history.epoch.append(epoch + 1)
        history.train_risk.append(train_risk)
        history.val_risk.append(val_risk)
        history.test_error.append(test_err)
        history.lr.append(lr)
    return model, history


def select_model(candidates, val1, val2, priors: PriorTriple, loss: LossSpec) -> int:
    """Index of the candidate with the smallest unbiased validation risk (first on ties).

    ``candidates`` holds models or ``(config, model)`` pairs.
    """
    if not candidates:
        raise ConfigError("no candidates to select from")
    risks = []
    for cand in candidates:
        model = cand[1] if isinstance(cand, tuple) else cand
        risks.append(empirical_risk_uu(model, val1, val2, priors, loss).value)
    return int(np.argmin(risks))
