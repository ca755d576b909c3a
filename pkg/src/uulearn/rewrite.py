"""Backward-correction coefficients for learning from two unlabeled sets.

Given the test prior ``pi`` and the priors ``theta > theta_prime`` of the two
unlabeled marginals, the classification risk

    R(g) = pi * E_P[l(g(X))] + (1 - pi) * E_N[l(-g(X))]

equals ``E_tr[a l(g) + b l(-g)] + E_tr'[c l(-g) + d l(g)]`` for the
coefficients returned by :func:`correction_coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DegeneratePriorsError, DomainError, SingleClassError, UnsupportedLossError
from .losses import LossKind, LossSpec

__all__ = [
    "PriorTriple",
    "CorrectionCoefficients",
    "CostWeights",
    "InfeasibilityWitness",
    "Reduction",
    "correction_coefficients",
    "cost_weights",
    "classify_reduction",
    "su_prior",
    "single_set_witness",
    "ccn_backward_coefficients",
    "pn_coefficients",
]

SU_TOL = 1e-9


def _check_pi(pi):
    if not math.isfinite(pi) or not 0.0 <= pi <= 1.0:
        raise DegeneratePriorsError(f"pi must lie in [0, 1], got {pi}")
    if pi in (0.0, 1.0):
        raise SingleClassError(f"pi={pi} leaves a single class")


@dataclass(frozen=True)
class PriorTriple:
    """Test prior and the two training-marginal priors.

    The constructor enforces ``theta > theta_prime``. If the caller passes them
    the other way round they are swapped and ``swapped`` is set, meaning the
    caller's second set now plays the role of the first (see :meth:`orient`).
    """

    pi: float
    theta: float
    theta_prime: float
    swapped: bool = field(default=False, compare=False)

    def __post_init__(self):
        pi, theta, theta_prime = float(self.pi), float(self.theta), float(self.theta_prime)
        _check_pi(pi)
        for name, v in (("theta", theta), ("theta_prime", theta_prime)):
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise DegeneratePriorsError(f"{name} must lie in [0, 1], got {v}")
        if theta == theta_prime:
            raise DegeneratePriorsError(f"theta and theta_prime coincide ({theta})")
        swapped = self.swapped
        if theta < theta_prime:
            theta, theta_prime = theta_prime, theta
            swapped = not swapped
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_prime", theta_prime)
        object.__setattr__(self, "swapped", swapped)

    @property
    def gap(self) -> float:
        return self.theta - self.theta_prime

    def orient(self, first, second):
        """Return ``(first, second)`` reordered to match the canonical priors."""
        return (second, first) if self.swapped else (first, second)

    def with_pi(self, pi: float) -> "PriorTriple":
        return PriorTriple(pi, self.theta, self.theta_prime, swapped=self.swapped)

    def as_dict(self) -> dict:
        return {"pi": self.pi, "theta": self.theta, "theta_prime": self.theta_prime}


@dataclass(frozen=True)
class CorrectionCoefficients:
    """Corrected losses ``a l(z) + b l(-z)`` on set one at ``z = g(x)`` and
    ``c l(z) + d l(-z)`` on set two at ``z = -g(x')``."""

    a: float
    b: float
    c: float
    d: float

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


@dataclass(frozen=True)
class CostWeights:
    alpha: float
    alpha_prime: float
    offset: float

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha_prime": self.alpha_prime, "offset": self.offset}


@dataclass(frozen=True)
class InfeasibilityWitness:
    """Coefficients forced by the three probe classifiers and the prior they would require.

    ``theta_required`` is None when pi = 1/2 (division by zero).
    """

    a: float
    b: float
    theta_required: float | None

    @property
    def feasible(self) -> bool:
        return self.theta_required is not None and 0.0 <= self.theta_required <= 1.0


class Reduction(str, Enum):
    PN = "PN"
    PU = "PU"
    SU = "SU"
    GENERAL = "General"


def correction_coefficients(priors: PriorTriple) -> CorrectionCoefficients:
    pi, t, tp = priors.pi, priors.theta, priors.theta_prime
    gap = t - tp
    return CorrectionCoefficients(
        a=(1.0 - tp) * pi / gap,
        b=-tp * (1.0 - pi) / gap,
        c=t * (1.0 - pi) / gap,
        d=-(1.0 - t) * pi / gap,
    )


def pn_coefficients(pi: float) -> CorrectionCoefficients:
    """Supervised weights: set one is positive data, set two is negative data."""
    _check_pi(pi)
    return CorrectionCoefficients(a=pi, b=0.0, c=1.0 - pi, d=0.0)


def cost_weights(priors: PriorTriple) -> CostWeights:
    """Cost-sensitive weights of the simplified estimator (symmetric losses only).

    Computed from their own closed forms, not from the a, b, c, d above, so
    that comparing the two estimators is a genuine cross-check.
    """
    pi, t, tp = priors.pi, priors.theta, priors.theta_prime
    gap = t - tp
    return CostWeights(
        alpha=(tp + pi - 2.0 * tp * pi) / gap,
        alpha_prime=(t + pi - 2.0 * t * pi) / gap,
        offset=(tp * (1.0 - pi) + (1.0 - t) * pi) / gap,
    )


def su_prior(pi: float) -> float:
    """Prior of the second marginal when the data are similar/unlabeled pairs."""
    return pi * pi / (2.0 * pi * pi - 2.0 * pi + 1.0)


def classify_reduction(priors: PriorTriple) -> Reduction:
    t, tp, pi = priors.theta, priors.theta_prime, priors.pi
    if t == 1.0 and tp == 0.0:
        return Reduction.PN
    if t == 1.0 and tp == pi:
        return Reduction.PU
    lo, hi = sorted((pi, su_prior(pi)))
    if abs(tp - lo) <= SU_TOL and abs(t - hi) <= SU_TOL:
        return Reduction.SU
    return Reduction.GENERAL


def single_set_witness(pi: float, loss: LossSpec | None = None) -> InfeasibilityWitness:
    """Constants a, b a single-set rewrite would need, and the prior they force.

    Probing with g = +inf, g = -inf and the perfect separator pins a = pi,
    b = 1 - pi and theta = pi / (2 pi - 1), which is never a valid prior.
    Only losses bounded at both ends (zero-one, sigmoid, ramp) are covered;
    passing an unbounded loss raises.
    """
    if loss is not None and loss.kind is LossKind.LOGISTIC:
        raise UnsupportedLossError("the single-set argument needs a loss bounded at +-inf")
    if not math.isfinite(pi):
        raise DomainError("pi must be finite")
    _check_pi(pi)
    a, b = pi, 1.0 - pi
    denom = a - b
    theta = None if denom == 0.0 else a / denom
    return InfeasibilityWitness(a=a, b=b, theta_required=theta)


def ccn_backward_coefficients(priors: PriorTriple) -> CorrectionCoefficients:
    """Backward correction under class-conditional label noise.

    Set one is read as noisy positives with flip rate ``rho_pos = 1 - theta``
    and set two as noisy negatives with flip rate ``rho_neg = theta_prime``.
    """
    rho_pos = 1.0 - priors.theta
    rho_neg = priors.theta_prime
    denom = 1.0 - rho_pos - rho_neg
    if denom <= 0:
        raise DegeneratePriorsError("noise rates leave no signal (theta <= theta_prime)")
    return CorrectionCoefficients(
        a=(1.0 - rho_neg) / denom,
        b=-rho_pos / denom,
        c=(1.0 - rho_pos) / denom,
        d=-rho_neg / denom,
    )
