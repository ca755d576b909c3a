"""Margin losses l(z) with derivatives and the constants used by the bounds.

All functions accept scalars or numpy arrays of margins ``z = y * g(x)`` and
are vectorized. Scalars in give Python floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import DomainError, UnsupportedLossError

__all__ = [
    "LossKind",
    "LossSpec",
    "LossConstants",
    "ZERO_ONE",
    "SIGMOID",
    "LOGISTIC",
    "RAMP",
    "CANONICAL_GRID",
    "get_loss",
    "loss_value",
    "loss_derivative",
    "check_symmetry",
    "loss_constants",
]


class LossKind(str, Enum):
    ZERO_ONE = "zero-one"
    SIGMOID = "sigmoid"
    LOGISTIC = "logistic"
    RAMP = "ramp"


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind
    differentiable: bool
    symmetric: bool

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def has_gradient(self) -> bool:
        """Usable for gradient training (derivative or subgradient everywhere)."""
        return self.kind is not LossKind.ZERO_ONE

    def __call__(self, z):
        return loss_value(self, z)


@dataclass(frozen=True)
class LossConstants:
    """Sup of the loss (``c_ell``) and its Lipschitz constant (``l_ell``) on [-c_g, c_g]."""

    c_ell: float
    l_ell: float
    c_g: float

    @property
    def bounds_supported(self) -> bool:
        return math.isfinite(self.l_ell)


ZERO_ONE = LossSpec(LossKind.ZERO_ONE, differentiable=False, symmetric=True)
SIGMOID = LossSpec(LossKind.SIGMOID, differentiable=True, symmetric=True)
LOGISTIC = LossSpec(LossKind.LOGISTIC, differentiable=True, symmetric=False)
# kinks at z = +-1; loss_derivative uses the flat-side value there
RAMP = LossSpec(LossKind.RAMP, differentiable=False, symmetric=True)

_BY_NAME = {spec.name: spec for spec in (ZERO_ONE, SIGMOID, LOGISTIC, RAMP)}
_BY_NAME["zero_one"] = ZERO_ONE

CANONICAL_GRID = np.round(np.arange(-1000, 1001) * 0.01, 2)


def get_loss(name) -> LossSpec:
    """Look up a loss by its config name ("zero-one", "sigmoid", "logistic", "ramp")."""
    if isinstance(name, LossSpec):
        return name
    try:
        return _BY_NAME[str(name).strip().lower()]
    except KeyError:
        raise UnsupportedLossError(
            f"unknown loss {name!r}; expected one of zero-one, sigmoid, logistic, ramp"
        ) from None


def _as_margin(z):
    arr = np.asarray(z, dtype=float)
    if not np.isfinite(arr).all():
        raise DomainError("margins must be finite")
    return arr


def _out(arr, z):
    return float(arr) if np.ndim(z) == 0 else arr


def loss_value(spec: LossSpec, z):
    """Evaluate l(z). The zero-one loss uses sign(0) = 0, so l01(0) = 1/2."""
    arr = _as_margin(z)
    kind = spec.kind
    if kind is LossKind.SIGMOID:
        val = expit(-arr)
    elif kind is LossKind.LOGISTIC:
        val = np.logaddexp(0.0, -arr)
    elif kind is LossKind.RAMP:
        val = np.clip((1.0 - arr) / 2.0, 0.0, 1.0)
    else:
        val = (1.0 - np.sign(arr)) / 2.0
    return _out(val, z)


def loss_derivative(spec: LossSpec, z):
    """Evaluate l'(z).

    The ramp loss takes the flat-side value 0 at its kinks z = -1 and z = 1.
    The zero-one loss has no usable derivative and raises.
    """
    kind = spec.kind
    if kind is LossKind.ZERO_ONE:
        raise UnsupportedLossError("zero-one loss has no gradient")
    arr = _as_margin(z)
    if kind is LossKind.SIGMOID:
        # -e^z / (1 + e^z)^2 written without overflow
        val = -expit(arr) * expit(-arr)
    elif kind is LossKind.LOGISTIC:
        val = -expit(-arr)
    else:
        val = np.where(np.abs(arr) < 1.0, -0.5, 0.0)
    return _out(val, z)


def check_symmetry(spec: LossSpec, grid) -> bool:
    """True iff |l(z) + l(-z) - 1| <= 1e-12 at every grid point."""
    z = np.asarray(grid, dtype=float)
    if z.size == 0:
        raise DomainError("symmetry grid must be non-empty")
    dev = np.abs(loss_value(spec, z) + loss_value(spec, -z) - 1.0)
    return bool(np.all(dev <= 1e-12))


def loss_constants(spec: LossSpec, c_g: float) -> LossConstants:
    """Closed-form sup and Lipschitz constant of the loss on [-c_g, c_g].

    Every supported loss is nonincreasing, so the sup sits at -c_g. The
    zero-one loss is a step and gets ``l_ell = inf`` (not usable in bounds).
    """
    if not (math.isfinite(c_g) and c_g > 0):
        raise DomainError(f"c_g must be positive and finite, got {c_g}")
    c_ell = float(loss_value(spec, -c_g))
    kind = spec.kind
    if kind is LossKind.SIGMOID:
        l_ell = 0.25  # |l'| peaks at z = 0, which is always inside the interval
    elif kind is LossKind.LOGISTIC:
        l_ell = float(expit(c_g))
    elif kind is LossKind.RAMP:
        l_ell = 0.5
    else:
        l_ell = math.inf
    return LossConstants(c_ell=c_ell, l_ell=l_ell, c_g=float(c_g))
