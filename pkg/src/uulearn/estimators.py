"""Empirical risk estimators and the exact risk of linear scorers on Gaussian mixtures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .errors import (
    DomainError,
    EmptySampleError,
    ShapeError,
    SingleClassError,
    UnsupportedLossError,
    UnsupportedModelError,
)
from .losses import LossKind, LossSpec, loss_value
from .models import LinearModel
from .rewrite import (
    CostWeights,
    PriorTriple,
    correction_coefficients,
    cost_weights,
)

__all__ = [
    "UnlabeledSet",
    "LabeledSet",
    "RiskEstimate",
    "EstimatorKind",
    "GaussianMixtureSpec",
    "corrected_risk",
    "empirical_risk_pn",
    "empirical_risk_uu",
    "empirical_risk_uu_sym",
    "empirical_risk_pu",
    "empirical_balanced_risk",
    "zero_one_test_error",
    "true_risk_gaussian",
]


def _matrix(features):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"features must be a matrix, got shape {X.shape}")
    return X


@dataclass
class UnlabeledSet:
    features: np.ndarray
    declared_prior: float
    origin_seed: int | None = None
    with_replacement: bool = False

    def __post_init__(self):
        self.features = _matrix(self.features)
        if len(self.features) < 1:
            raise EmptySampleError("an unlabeled set needs at least one point")
        if not np.all(np.isfinite(self.features)):
            raise DomainError("features must be finite")
        if not 0.0 <= self.declared_prior <= 1.0:
            raise DomainError(f"declared_prior must lie in [0, 1], got {self.declared_prior}")

    def __len__(self):
        return len(self.features)

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class LabeledSet:
    features: np.ndarray
    labels: np.ndarray
    n_pos: int = field(init=False)
    n_neg: int = field(init=False)

    def __post_init__(self):
        self.features = _matrix(self.features)
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if len(self.labels) != len(self.features):
            raise ShapeError("features and labels have different lengths")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise DomainError("labels must be +1 or -1")
        self.n_pos = int(np.sum(self.labels == 1))
        self.n_neg = int(np.sum(self.labels == -1))

    def __len__(self):
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def positives(self) -> np.ndarray:
        return self.features[self.labels == 1]

    @property
    def negatives(self) -> np.ndarray:
        return self.features[self.labels == -1]

    def subset(self, idx) -> "LabeledSet":
        return LabeledSet(self.features[idx], self.labels[idx])


class EstimatorKind(str, Enum):
    PN = "pn"
    UU = "uu"
    UU_SYM = "uu_sym"
    PU = "pu"
    BALANCED = "balanced"
    ZERO_ONE_ERROR = "zero_one_error"


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    kind: EstimatorKind
    n: int
    n_prime: int | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value, "n": self.n, "n_prime": self.n_prime}


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Two isotropic Gaussians N(mean_pos, sigma^2 I), N(mean_neg, sigma^2 I) with P(Y=+1) = pi."""

    mean_pos: tuple
    mean_neg: tuple
    sigma: float = 1.0
    pi: float = 0.5

    def __post_init__(self):
        mp = tuple(float(v) for v in self.mean_pos)
        mn = tuple(float(v) for v in self.mean_neg)
        if len(mp) != len(mn) or not mp:
            raise ShapeError("class means must be non-empty and of equal dimension")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not 0.0 < self.pi < 1.0:
            raise SingleClassError(f"pi must lie in (0, 1), got {self.pi}")
        object.__setattr__(self, "mean_pos", mp)
        object.__setattr__(self, "mean_neg", mn)

    @property
    def dim(self) -> int:
        return len(self.mean_pos)

    @classmethod
    def standard(cls, pi=0.3):
        """Means (+1, +1) and (-1, -1), identity covariance."""
        return cls((1.0, 1.0), (-1.0, -1.0), 1.0, pi)


def _features(data):
    if isinstance(data, (UnlabeledSet, LabeledSet)):
        X = data.features
    else:
        X = _matrix(data)
    if len(X) == 0:
        raise EmptySampleError("estimator received an empty sample")
    return X


def corrected_risk(scores1, scores2, weights, loss: LossSpec, set_weights=(1.0, 1.0)) -> float:
    """Corrected empirical risk from precomputed scores of the two sets.

    With :class:`CorrectionCoefficients` this is
    ``w1 * mean(a l(s1) + b l(-s1)) + w2 * mean(c l(-s2) + d l(s2))``; with
    :class:`CostWeights` it is ``mean(alpha l(s1)) + mean(alpha' l(-s2)) - offset``
    (``set_weights`` must then be (1, 1)).
    """
    s1 = np.asarray(scores1, dtype=float)
    s2 = np.asarray(scores2, dtype=float)
    w1, w2 = set_weights
    if isinstance(weights, CostWeights):
        if (w1, w2) != (1.0, 1.0):
            raise ValueError("the simplified form is only defined for unit set weights")
        return float(
            weights.alpha * np.mean(loss_value(loss, s1))
            + weights.alpha_prime * np.mean(loss_value(loss, -s2))
            - weights.offset
        )
    k = weights
    l1p, l1m = loss_value(loss, s1), loss_value(loss, -s1)
    l2p, l2m = loss_value(loss, s2), loss_value(loss, -s2)
    # term-wise means, so that b = d = 0 reproduces the supervised estimate bit for bit
    return float(
        w1 * (k.a * l1p.mean() + k.b * l1m.mean()) + w2 * (k.c * l2m.mean() + k.d * l2p.mean())
    )


def empirical_risk_pn(model, pos, neg, pi: float, loss: LossSpec) -> RiskEstimate:
    """Supervised estimate (pi/n) sum l(g(x_i)) + ((1-pi)/n') sum l(-g(x'_j))."""
    Xp, Xn = _features(pos), _features(neg)
    if not 0.0 < pi < 1.0:
        raise SingleClassError(f"pi must lie in (0, 1), got {pi}")
    value = pi * np.mean(loss_value(loss, model.forward(Xp))) + (1.0 - pi) * np.mean(
        loss_value(loss, -model.forward(Xn))
    )
    return RiskEstimate(float(value), EstimatorKind.PN, len(Xp), len(Xn))


def empirical_risk_uu(model, u1, u2, priors: PriorTriple, loss: LossSpec) -> RiskEstimate:
    """Unbiased risk estimate from two unlabeled sets.

    ``u1`` and ``u2`` are given in the order the priors were passed to
    :class:`PriorTriple`; they are reoriented if the constructor swapped them.
    The value may be negative and is never clipped.
    """
    u1, u2 = priors.orient(u1, u2)
    X1, X2 = _features(u1), _features(u2)
    coeffs = correction_coefficients(priors)
    value = corrected_risk(model.forward(X1), model.forward(X2), coeffs, loss)
    return RiskEstimate(value, EstimatorKind.UU, len(X1), len(X2))


def empirical_risk_uu_sym(model, u1, u2, priors: PriorTriple, loss: LossSpec) -> RiskEstimate:
    """Cost-sensitive form of :func:`empirical_risk_uu`, valid when l(z) + l(-z) = 1."""
    if not loss.symmetric:
        raise UnsupportedLossError(f"{loss.name} loss is not symmetric")
    u1, u2 = priors.orient(u1, u2)
    X1, X2 = _features(u1), _features(u2)
    value = corrected_risk(model.forward(X1), model.forward(X2), cost_weights(priors), loss)
    return RiskEstimate(value, EstimatorKind.UU_SYM, len(X1), len(X2))


def empirical_risk_pu(model, pos, unlabeled, pi: float, loss: LossSpec) -> RiskEstimate:
    """Positive-unlabeled estimate, with the unlabeled set drawn from the test marginal."""
    Xp, Xu = _features(pos), _features(unlabeled)
    sp, su = model.forward(Xp), model.forward(Xu)
    value = (
        pi * np.mean(loss_value(loss, sp))
        - pi * np.mean(loss_value(loss, -sp))
        + np.mean(loss_value(loss, -su))
    )
    return RiskEstimate(float(value), EstimatorKind.PU, len(Xp), len(Xu))


def empirical_balanced_risk(model, pos, neg, loss: LossSpec) -> RiskEstimate:
    Xp, Xn = _features(pos), _features(neg)
    value = 0.5 * np.mean(loss_value(loss, model.forward(Xp))) + 0.5 * np.mean(
        loss_value(loss, -model.forward(Xn))
    )
    return RiskEstimate(float(value), EstimatorKind.BALANCED, len(Xp), len(Xn))


def zero_one_test_error(model, test: LabeledSet) -> RiskEstimate:
    """Fraction of points with y g(x) < 0; ties g(x) = 0 count half."""
    if len(test) == 0:
        raise EmptySampleError("test set is empty")
    margins = test.labels * model.forward(test.features)
    value = float(np.mean((1.0 - np.sign(margins)) / 2.0))
    return RiskEstimate(value, EstimatorKind.ZERO_ONE_ERROR, len(test))


def _gauss_expect(loss: LossSpec, mean: float, sd: float) -> float:
    """E[l(S)] for S ~ N(mean, sd^2)."""
    if sd == 0.0:
        return float(loss_value(loss, mean))
    if loss.kind is LossKind.ZERO_ONE:
        return float(ndtr(-mean / sd))
    # truncated at +-10 sd; the neglected mass is below 1e-22
    integrand = lambda t: loss_value(loss, mean + sd * t) * math.exp(-0.5 * t * t)
    points = None
    if loss.kind is LossKind.RAMP:
        points = [k for k in ((-1.0 - mean) / sd, (1.0 - mean) / sd) if -10 < k < 10]
    val, _ = integrate.quad(integrand, -10.0, 10.0, epsabs=1e-12, epsrel=1e-12, limit=200, points=points)
    return val / math.sqrt(2.0 * math.pi)


def true_risk_gaussian(model, spec: GaussianMixtureSpec, loss: LossSpec) -> float:
    """Exact classification risk of a linear scorer under a Gaussian mixture.

    Under class y the score w.x + b is N(w.mu_y + b, sigma^2 |w|^2), which
    reduces the risk to two one-dimensional Gaussian expectations: a normal
    CDF for the zero-one loss, adaptive quadrature otherwise.
    """
    if not isinstance(model, LinearModel):
        raise UnsupportedModelError("the closed-form risk needs a linear model")
    if model.input_dim != spec.dim:
        raise ShapeError("model and mixture dimensions differ")
    w, b = model.weights, model.bias
    sd = spec.sigma * float(np.linalg.norm(w))
    m_pos = float(w @ np.asarray(spec.mean_pos)) + b
    m_neg = float(w @ np.asarray(spec.mean_neg)) + b
    return spec.pi * _gauss_expect(loss, m_pos, sd) + (1.0 - spec.pi) * _gauss_expect(loss, -m_neg, sd)
