"""Synthetic data, unlabeled-set construction and CSV dataset I/O.

Every generator is a pure function of its inputs and an integer seed.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DataExhaustedError,
    DegeneratePriorsError,
    ParseError,
    SingleClassError,
)
from .estimators import GaussianMixtureSpec, LabeledSet, UnlabeledSet
from .rewrite import PriorTriple

__all__ = [
    "SamplePlan",
    "sample_mixture",
    "sample_class",
    "make_u_pair",
    "mixture_u_pair",
    "subsample_to_prior",
    "perturb_priors",
    "load_csv",
    "save_csv",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplePlan:
    n: int
    n_prime: int
    theta: float
    theta_prime: float
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.n_prime < 1:
            raise ConfigError(f"sample sizes must be positive, got n={self.n}, n'={self.n_prime}")
        for v in (self.theta, self.theta_prime):
            if not 0.0 <= v <= 1.0:
                raise DegeneratePriorsError(f"priors must lie in [0, 1], got {v}")
        if self.theta == self.theta_prime:
            raise DegeneratePriorsError("theta and theta_prime coincide")


def sample_class(spec: GaussianMixtureSpec, label: int, n: int, rng) -> np.ndarray:
    mean = np.asarray(spec.mean_pos if label == 1 else spec.mean_neg)
    return mean + spec.sigma * rng.standard_normal((n, spec.dim))


def sample_mixture(spec: GaussianMixtureSpec, n: int, seed) -> LabeledSet:
    """Draw n labeled points: Y = +1 with probability pi, X | Y Gaussian."""
    if n < 1:
        raise ConfigError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = np.where(rng.random(n) < spec.pi, 1, -1)
    means = np.where(labels[:, None] == 1, np.asarray(spec.mean_pos), np.asarray(spec.mean_neg))
    X = means + spec.sigma * rng.standard_normal((n, spec.dim))
    return LabeledSet(X, labels)


def _draw(pool, k, rng, replace):
    if k == 0:
        return pool[:0]
    if len(pool) == 0:
        raise DataExhaustedError(f"need {k} points from an empty pool")
    idx = rng.choice(len(pool), size=k, replace=replace)
    return pool[idx]


def make_u_pair(pos_pool, neg_pool, plan: SamplePlan):
    """Build two unlabeled sets from class pools.

    Each point of the first set comes from ``pos_pool`` with probability
    ``plan.theta`` (an independent coin per point), otherwise from
    ``neg_pool``; likewise for the second set with ``plan.theta_prime``.
    Points are drawn without replacement across both sets when the pools
    are large enough, otherwise with replacement (logged and flagged on the
    returned sets).
    """
    pos_pool = np.asarray(pos_pool, dtype=float)
    neg_pool = np.asarray(neg_pool, dtype=float)
    rng = np.random.default_rng(plan.seed)
    coin1 = rng.random(plan.n) < plan.theta
    coin2 = rng.random(plan.n_prime) < plan.theta_prime
    k_pos = int(coin1.sum() + coin2.sum())
    k_neg = plan.n + plan.n_prime - k_pos
    replace = k_pos > len(pos_pool) or k_neg > len(neg_pool)
    if replace:
        log.warning("pools too small for sampling without replacement; resampling with replacement")
    pos = _draw(pos_pool, k_pos, rng, replace)
    neg = _draw(neg_pool, k_neg, rng, replace)
    dim = pos.shape[1] if k_pos else neg.shape[1]

    def assemble(coin, pos_rows, neg_rows):
        X = np.empty((len(coin), dim))
        X[coin] = pos_rows
        X[~coin] = neg_rows
        return X

    n1p = int(coin1.sum())
    X1 = assemble(coin1, pos[:n1p], neg[: plan.n - n1p])
    X2 = assemble(coin2, pos[n1p:], neg[plan.n - n1p:])
    return (
        UnlabeledSet(X1, plan.theta, plan.seed, with_replacement=replace),
        UnlabeledSet(X2, plan.theta_prime, plan.seed, with_replacement=replace),
    )


def mixture_u_pair(spec: GaussianMixtureSpec, plan: SamplePlan):
    """Unlabeled pair drawn directly from the class-conditional Gaussians of ``spec``."""
    rng = np.random.default_rng([plan.seed, 1])
    total = plan.n + plan.n_prime
    pos_pool = sample_class(spec, 1, total, rng)
    neg_pool = sample_class(spec, -1, total, rng)
    return make_u_pair(pos_pool, neg_pool, plan)


def _subsample_counts(n_pos: int, n_neg: int, pi: float) -> tuple[int, int]:
    # total m = p + q is feasible iff some p with p <= n_pos, m - p <= n_neg
    # satisfies |p - pi m| <= 1; take the largest m, then p closest to pi m
    m = np.arange(n_pos + n_neg, 0, -1)
    lo = np.maximum(np.ceil(pi * m - 1.0 - 1e-9), np.maximum(m - n_neg, 0))
    hi = np.minimum(np.floor(pi * m + 1.0 + 1e-9), n_pos)
    ok = np.flatnonzero(lo <= hi)
    m0 = int(m[ok[0]])
    p = int(np.clip(round(pi * m0), lo[ok[0]], hi[ok[0]]))
    return p, m0 - p


def subsample_to_prior(data: LabeledSet, pi: float, seed) -> LabeledSet:
    """Largest subset whose positive fraction is within one sample of ``pi``.

    Rows are taken in the order of a seeded shuffle of each class.
    """
    if data.n_pos == 0 or data.n_neg == 0:
        raise SingleClassError("subsampling needs both classes")
    if not 0.0 < pi < 1.0:
        raise SingleClassError(f"pi must lie in (0, 1), got {pi}")
    p, q = _subsample_counts(data.n_pos, data.n_neg, pi)
    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(data.labels == 1)
    neg_idx = np.flatnonzero(data.labels == -1)
    keep = np.concatenate([rng.permutation(pos_idx)[:p], rng.permutation(neg_idx)[:q]])
    return data.subset(np.sort(keep))


def perturb_priors(priors: PriorTriple, eps: float, eps_prime: float) -> PriorTriple:
    """Training-time priors (pi, eps * theta, eps' * theta'); the data keep the true ones."""
    theta, theta_prime = eps * priors.theta, eps_prime * priors.theta_prime
    for v in (theta, theta_prime):
        if not 0.0 <= v <= 1.0:
            raise DegeneratePriorsError(f"perturbed prior {v:g} is outside [0, 1]")
    if theta <= theta_prime:
        raise DegeneratePriorsError("perturbed priors collide or change order")
    return PriorTriple(priors.pi, theta, theta_prime, swapped=priors.swapped)


def save_csv(path, data) -> None:
    """Write ``f1,...,fd[,label]`` with floats in shortest round-trip form."""
    X = data.features
    labeled = isinstance(data, LabeledSet)
    header = [f"f{i + 1}" for i in range(X.shape[1])] + (["label"] if labeled else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, row in enumerate(X):
            cells = [repr(float(v)) for v in row]
            if labeled:
                cells.append(str(int(data.labels[i])))
            writer.writerow(cells)


def load_csv(path, declared_prior: float | None = None):
    """Read a dataset written by :func:`save_csv`.

    Files with a ``label`` column give a :class:`LabeledSet`; files without one
    give an :class:`UnlabeledSet` and need ``declared_prior``.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file", line=1)
    header = [h.strip() for h in rows[0]]
    labeled = bool(header) and header[-1] == "label"
    feat_cols = header[:-1] if labeled else header
    if not feat_cols or feat_cols != [f"f{i + 1}" for i in range(len(feat_cols))]:
        raise ParseError("expected header f1,...,fd[,label]", line=1)
    width = len(header)
    values, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} cells, got {len(row)}", line=lineno)
        try:
            values.append([float(c) for c in row[: len(feat_cols)]])
            if labeled:
                lab = float(row[-1])
                if lab not in (1.0, -1.0):
                    raise ParseError(f"label must be +1 or -1, got {row[-1]!r}", line=lineno)
                labels.append(int(lab))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"non-numeric cell ({exc})", line=lineno) from None
        if not all(math.isfinite(v) for v in values[-1]):
            raise ParseError("non-finite feature value", line=lineno)
    if not values:
        raise ParseError("no data rows", line=2)
    X = np.asarray(values)
    if labeled:
        return LabeledSet(X, np.asarray(labels))
    if declared_prior is None:
        raise ConfigError(f"{path} has no label column; a declared prior is required")
    return UnlabeledSet(X, declared_prior)
