"""Decision functions g: R^d -> R with analytic parameter gradients.

Parameters live in one flat float64 vector. Flattening order is layer-major
and weights-before-bias; a weight matrix of shape (fan_in, fan_out) is stored
row-major. For :class:`LinearModel` this is simply ``[w_1, ..., w_d, b]``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptySampleError, ShapeError, UnsupportedLossError
from .losses import LossSpec, loss_derivative
from .rewrite import CorrectionCoefficients, CostWeights

__all__ = [
    "FLATTEN_ORDER",
    "LinearModel",
    "MlpModel",
    "forward",
    "parameter_gradient",
    "risk_gradient",
    "score_gradients",
    "init_model",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]

FLATTEN_ORDER = "layer-major/weights-before-bias/row-major"


def _as_batch(x, dim):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ShapeError(f"expected inputs with {dim} features, got shape {np.shape(x)}")
    return arr, single


class _Model:
    kind = ""
    params: np.ndarray
    seed: int | None = None

    @property
    def n_params(self) -> int:
        return self.params.size

    def set_params(self, flat) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != self.params.shape:
            raise ShapeError(f"expected {self.params.size} parameters, got {flat.shape}")
        self.params[...] = flat

    def copy(self):
        clone = self.__class__.__new__(self.__class__)
        clone.__dict__.update(self.__dict__)
        clone.params = self.params.copy()
        clone._bind()
        return clone

    def _bind(self):
        pass

    def __call__(self, x):
        return self.forward(x)

    def to_dict(self) -> dict:
        return model_to_dict(self)


class LinearModel(_Model):
    """g(x) = w.x + b."""

    kind = "linear"

    def __init__(self, weights, bias=0.0, seed=None):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.ndim != 1 or w.size == 0:
            raise ShapeError("weights must be a non-empty vector")
        self.params = np.concatenate([w, [float(bias)]])
        self.seed = seed
        self._bind()

    def _bind(self):
        self.weights = self.params[:-1]

    @property
    def bias(self) -> float:
        return float(self.params[-1])

    @property
    def input_dim(self) -> int:
        return self.params.size - 1

    @property
    def dims(self) -> list[int]:
        return [self.input_dim, 1]

    def forward(self, x):
        X, single = _as_batch(x, self.input_dim)
        s = X @ self.weights + self.params[-1]
        return float(s[0]) if single else s

    def backward(self, x, upstream):
        """Return sum_i upstream_i * d g(x_i) / d params."""
        X, _ = _as_batch(x, self.input_dim)
        u = np.asarray(upstream, dtype=float).reshape(-1)
        return np.concatenate([u @ X, [u.sum()]])


class MlpModel(_Model):
    """Fully connected ReLU network ``d -> h_1 -> ... -> h_k -> 1``."""

    kind = "mlp"

    def __init__(self, layer_dims, params=None, activation="relu", seed=None):
        dims = [int(v) for v in layer_dims]
        if len(dims) < 2 or any(v <= 0 for v in dims):
            raise ConfigError(f"layer_dims must be >= 2 positive ints, got {layer_dims}")
        if dims[-1] != 1:
            raise ConfigError("the output layer must have width 1")
        if activation != "relu":
            raise ConfigError(f"unsupported activation {activation!r}")
        self.layer_dims = dims
        self.activation = activation
        self.seed = seed
        size = sum(i * o + o for i, o in zip(dims[:-1], dims[1:]))
        if params is None:
            self.params = np.zeros(size)
        else:
            self.params = np.array(params, dtype=float).reshape(-1)
            if self.params.size != size:
                raise ShapeError(f"expected {size} parameters, got {self.params.size}")
        self._bind()

    def _bind(self):
        self.layers = []
        pos = 0
        for i, o in zip(self.layer_dims[:-1], self.layer_dims[1:]):
            W = self.params[pos:pos + i * o].reshape(i, o)
            pos += i * o
            b = self.params[pos:pos + o]
            pos += o
            self.layers.append((W, b))

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def dims(self) -> list[int]:
        return list(self.layer_dims)

    def _forward_cache(self, X):
        acts, pres = [X], []
        h = X
        for W, b in self.layers[:-1]:
            z = h @ W + b
            pres.append(z)
            h = np.maximum(z, 0.0)
            acts.append(h)
        W, b = self.layers[-1]
        return (h @ W + b)[:, 0], acts, pres

    def forward(self, x):
        X, single = _as_batch(x, self.input_dim)
        s, _, _ = self._forward_cache(X)
        return float(s[0]) if single else s

    def backward(self, x, upstream):
        """Return sum_i upstream_i * d g(x_i) / d params (flat, same order as params)."""
        X, _ = _as_batch(x, self.input_dim)
        _, acts, pres = self._forward_cache(X)
        delta = np.asarray(upstream, dtype=float).reshape(-1, 1)
        grads = []
        for k in range(len(self.layers) - 1, -1, -1):
            W, _ = self.layers[k]
            grads.append((acts[k].T @ delta, delta.sum(axis=0)))
            if k:
                delta = (delta @ W.T) * (pres[k - 1] > 0.0)
        return np.concatenate([part.ravel() for gw, gb in reversed(grads) for part in (gw, gb)])


def forward(model, x):
    return model.forward(x)


def parameter_gradient(model, x) -> np.ndarray:
    """Gradient of the scalar score g(x) with respect to all parameters."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("parameter_gradient takes a single input vector")
    return model.backward(x, [1.0])


def score_gradients(scores1, scores2, weights, loss: LossSpec, set_weights=(1.0, 1.0)):
    """Derivatives of the corrected empirical risk with respect to each score.

    ``weights`` is either :class:`CorrectionCoefficients` (general form) or
    :class:`CostWeights` (simplified form); the offset of the latter carries
    no gradient. Batch-size normalization is included.
    """
    if not loss.has_gradient:
        raise UnsupportedLossError(f"{loss.name} loss has no gradient")
    s1 = np.asarray(scores1, dtype=float)
    s2 = np.asarray(scores2, dtype=float)
    w1, w2 = set_weights
    if isinstance(weights, CostWeights):
        g1 = weights.alpha * loss_derivative(loss, s1)
        g2 = -weights.alpha_prime * loss_derivative(loss, -s2)
    elif isinstance(weights, CorrectionCoefficients):
        g1 = weights.a * loss_derivative(loss, s1) - weights.b * loss_derivative(loss, -s1)
        g2 = weights.d * loss_derivative(loss, s2) - weights.c * loss_derivative(loss, -s2)
    else:
        raise TypeError(f"unsupported weights {type(weights).__name__}")
    return w1 * g1 / s1.size, w2 * g2 / s2.size


def risk_gradient(model, batch1, batch2, weights, loss: LossSpec, set_weights=(1.0, 1.0)):
    """Exact parameter gradient of the corrected empirical risk on two batches."""
    X1 = np.asarray(batch1, dtype=float)
    X2 = np.asarray(batch2, dtype=float)
    if len(X1) == 0 or len(X2) == 0:
        raise EmptySampleError("both batches must be non-empty")
    u1, u2 = score_gradients(model.forward(X1), model.forward(X2), weights, loss, set_weights)
    return model.backward(X1, u1) + model.backward(X2, u2)


def init_model(kind: str, dims, seed: int):
    """Glorot-uniform weights, zero biases; deterministic in ``seed``.

    For ``kind="linear"`` ``dims`` is ``[d]`` (or ``[d, 1]``); for ``"mlp"`` it
    is the full list of layer widths ending in 1.
    """
    dims = [int(v) for v in np.atleast_1d(dims)] if dims is not None else []
    if not dims:
        raise ConfigError("dims must be non-empty")
    rng = np.random.default_rng(seed)
    if kind == "linear":
        if len(dims) == 2 and dims[1] == 1:
            dims = dims[:1]
        if len(dims) != 1 or dims[0] <= 0:
            raise ConfigError(f"linear model takes dims [d], got {dims}")
        d = dims[0]
        limit = math.sqrt(6.0 / (d + 1))
        return LinearModel(rng.uniform(-limit, limit, size=d), 0.0, seed=seed)
    if kind == "mlp":
        model = MlpModel(dims, seed=seed)
        for W, b in model.layers:
            fan_in, fan_out = W.shape
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            W[...] = rng.uniform(-limit, limit, size=W.shape)
            b[...] = 0.0
        return model
    raise ConfigError(f"unknown model kind {kind!r}")


def model_to_dict(model) -> dict:
    return {
        "kind": model.kind,
        "dims": model.dims,
        "activation": getattr(model, "activation", None),
        "params": [float(v) for v in model.params],
        "flatten_order": FLATTEN_ORDER,
        "seed": model.seed,
    }


def model_from_dict(doc: dict):
    try:
        kind = doc["kind"]
        params = np.asarray(doc["params"], dtype=float)
        dims = doc["dims"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed model document: {exc}") from None
    if doc.get("flatten_order", FLATTEN_ORDER) != FLATTEN_ORDER:
        raise ConfigError(f"unknown flattening order {doc['flatten_order']!r}")
    if kind == "linear":
        if params.size != dims[0] + 1:
            raise ShapeError("parameter count does not match dims")
        return LinearModel(params[:-1], params[-1], seed=doc.get("seed"))
    if kind == "mlp":
        return MlpModel(dims, params, activation=doc.get("activation") or "relu", seed=doc.get("seed"))
    raise ConfigError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))

