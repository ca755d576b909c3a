"""Estimation-error and uniform-deviation bounds for the unlabeled-unlabeled risk."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySampleError
from .losses import LossSpec, loss_constants
from .models import LinearModel
from .rewrite import PriorTriple, cost_weights

__all__ = [
    "BoundInputs",
    "RademacherEstimate",
    "chi",
    "c_delta",
    "empirical_rademacher_linear",
    "estimation_error_bound",
    "uniform_deviation_bound",
    "bound_terms",
    "bound_report",
]


@dataclass(frozen=True)
class BoundInputs:
    l_ell: float
    c_ell: float
    alpha: float
    alpha_prime: float
    n: int
    n_prime: int
    delta: float
    rad_n: float
    rad_n_prime: float

    def __post_init__(self):
        for name in ("l_ell", "c_ell", "alpha", "alpha_prime", "rad_n", "rad_n_prime"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")
        if self.n < 1 or self.n_prime < 1:
            raise DomainError("sample sizes must be positive")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class RademacherEstimate:
    value: float
    stderr: float

    def __float__(self):
        return self.value


def chi(n: int, n_prime: int, alpha: float, alpha_prime: float) -> float:
    """alpha / sqrt(n) + alpha' / sqrt(n')."""
    if n < 1 or n_prime < 1:
        raise DomainError("sample sizes must be positive")
    return alpha / math.sqrt(n) + alpha_prime / math.sqrt(n_prime)


def c_delta(delta: float) -> float:
    """sqrt(ln(2 / delta) / 2)."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(math.log(2.0 / delta) / 2.0)


def empirical_rademacher_linear(features, c_w: float, mc_rounds: int = 2000, seed=0) -> RademacherEstimate:
    """Monte-Carlo empirical Rademacher complexity of {x -> w.x : |w|_2 <= c_w}.

    Uses the identity sup_w (1/n) sum_i s_i w.x_i = (c_w / n) |sum_i s_i x_i|_2
    and averages over ``mc_rounds`` random sign vectors s. To cover an affine
    scorer w.x + b, append a constant column to ``features``.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.size == 0 or len(X) == 0:
        raise EmptySampleError("features are empty")
    if mc_rounds < 1:
        raise DomainError("mc_rounds must be >= 1")
    if not c_w > 0:
        raise DomainError("c_w must be positive")
    rng = np.random.default_rng(seed)
    n = len(X)
    vals = np.empty(mc_rounds)
    chunk = max(1, min(mc_rounds, 2**22 // max(n, 1)))
    for start in range(0, mc_rounds, chunk):
        stop = min(start + chunk, mc_rounds)
        signs = rng.integers(0, 2, size=(stop - start, n)) * 2.0 - 1.0
        vals[start:stop] = np.linalg.norm(signs @ X, axis=1)
    vals *= c_w / n
    stderr = float(vals.std(ddof=1) / math.sqrt(mc_rounds)) if mc_rounds > 1 else math.nan
    return RademacherEstimate(float(math.fsum(vals) / mc_rounds), stderr)


def bound_terms(inputs: BoundInputs, factor: float = 2.0) -> dict:
    """Complexity and deviation terms of the bound with leading factor ``factor``.

    ``factor=2`` gives the estimation-error bound, ``factor=1`` the uniform
    deviation bound sup_g |R_uu(g) - R(g)|.
    """
    comp = 2.0 * factor * inputs.l_ell * inputs.alpha * inputs.rad_n
    comp_prime = 2.0 * factor * inputs.l_ell * inputs.alpha_prime * inputs.rad_n_prime
    dev = factor * inputs.c_ell * c_delta(inputs.delta) * chi(
        inputs.n, inputs.n_prime, inputs.alpha, inputs.alpha_prime
    )
    return {
        "complexity_term": comp,
        "complexity_term_prime": comp_prime,
        "deviation_term": dev,
        "total": comp + comp_prime + dev,
    }


def estimation_error_bound(inputs: BoundInputs) -> float:
    """4 L alpha R_n + 4 L alpha' R'_n' + 2 C_l C_delta chi; holds w.p. >= 1 - delta."""
    return bound_terms(inputs, 2.0)["total"]


def uniform_deviation_bound(inputs: BoundInputs) -> float:
    """2 L alpha R_n + 2 L alpha' R'_n' + C_l C_delta chi."""
    return bound_terms(inputs, 1.0)["total"]


def bound_report(model, u1, u2, priors: PriorTriple, loss: LossSpec, delta: float = 0.05,
                 c_w: float | None = None, mc_rounds: int = 2000, seed=0) -> dict:
    """Both bounds for the norm ball around a linear model, or a "not computed" status.

    The class is {x -> w.x + b : |(w, b)|_2 <= c_w} with ``c_w`` defaulting to
    the norm of the model's parameters; C_g follows from the largest
    augmented feature norm in the two sets.
    """
    if not isinstance(model, LinearModel):
        return {"status": "not computed", "reason": "no Rademacher estimate for this model family"}
    u1, u2 = priors.orient(u1, u2)
    X1 = np.asarray(getattr(u1, "features", u1), dtype=float)
    X2 = np.asarray(getattr(u2, "features", u2), dtype=float)
    A1 = np.hstack([X1, np.ones((len(X1), 1))])
    A2 = np.hstack([X2, np.ones((len(X2), 1))])
    if c_w is None:
        c_w = float(np.linalg.norm(model.params))
    c_g = c_w * max(np.linalg.norm(A1, axis=1).max(), np.linalg.norm(A2, axis=1).max())
    consts = loss_constants(loss, c_g)
    if not consts.bounds_supported:
        return {"status": "not computed", "reason": f"{loss.name} loss is not Lipschitz"}
    w = cost_weights(priors)
    rad1 = empirical_rademacher_linear(A1, c_w, mc_rounds, seed)
    rad2 = empirical_rademacher_linear(A2, c_w, mc_rounds, seed)
    inputs = BoundInputs(consts.l_ell, consts.c_ell, w.alpha, w.alpha_prime, len(A1), len(A2), delta,
                         rad1.value, rad2.value)
    return {
        "status": "ok",
        "c_w": c_w,
        "c_g": c_g,
        "rad_stderr": [rad1.stderr, rad2.stderr],
        "estimation_error": bound_terms(inputs, 2.0),
        "uniform_deviation": bound_terms(inputs, 1.0),
    }
