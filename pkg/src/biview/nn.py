"""Small dense neural-network kernel with hand-written backward passes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHECKPOINT_VERSION = 1


def sigmoid(x):
    # tanh form avoids overflow warnings for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def relu(x):
    return np.maximum(x, 0.0)


def identity(x):
    return np.asarray(x, dtype=np.float64)


ACTIVATIONS = {
    "sigmoid": (sigmoid, lambda y, z: y * (1.0 - y)),
    "relu": (relu, lambda y, z: (z > 0).astype(np.float64)),
    "identity": (identity, lambda y, z: np.ones_like(z)),
}


class ShapeError(ValueError):
    pass


def glorot(fan_out: int, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "identity"

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"inconsistent layer shapes {self.weight.shape} / {self.bias.shape}")

    @classmethod
    def init(cls, n_in: int, n_out: int, activation: str = "identity", rng=None) -> DenseLayer:
        rng = rng if rng is not None else np.random.default_rng(0)
        return cls(glorot(n_out, n_in, rng), np.zeros(n_out), activation)

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]

    def params(self) -> list[np.ndarray]:
        return [self.weight, self.bias]

    def forward(self, x, return_cache: bool = False):
        """``activation(W x + b)``; ``x`` is one vector or a batch of row vectors."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_in:
            raise ShapeError(f"expected input dim {self.n_in}, got {x.shape[-1]}")
        z = x @ self.weight.T + self.bias
        y = ACTIVATIONS[self.activation][0](z)
        if return_cache:
            return y, (x, z, y)
        return y

    def backward(self, dy, cache):
        """Returns ``(dx, [dW, db])`` for a batch-shaped upstream gradient."""
        x, z, y = cache
        dz = dy * ACTIVATIONS[self.activation][1](y, z)
        x2 = np.atleast_2d(x)
        dz2 = np.atleast_2d(dz)
        dw = dz2.T @ x2
        db = dz2.sum(axis=0)
        dx = dz @ self.weight
        return dx, [dw, db]


class MLP:
    """A stack of :class:`DenseLayer`."""

    def __init__(self, layers: list[DenseLayer]):
        for a, b in zip(layers, layers[1:]):
            if a.n_out != b.n_in:
                raise ShapeError("consecutive layer dimensions do not match")
        self.layers = layers

    @classmethod
    def init(cls, dims, hidden_activation="relu", out_activation="identity", rng=None) -> MLP:
        rng = rng if rng is not None else np.random.default_rng(0)
        layers = []
        for i, (a, b) in enumerate(zip(dims, dims[1:])):
            act = out_activation if i == len(dims) - 2 else hidden_activation
            layers.append(DenseLayer.init(a, b, act, rng))
        return cls(layers)

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x, return_cache: bool = False):
        caches = []
        for layer in self.layers:
            x, c = layer.forward(x, return_cache=True)
            caches.append(c)
        return (x, caches) if return_cache else x

    def backward(self, dy, caches):
        grads = []
        for layer, c in zip(reversed(self.layers), reversed(caches)):
            dy, g = layer.backward(dy, c)
            grads = g + grads
        return dy, grads


def softmax(logits, axis: int = -1):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_xent(logits, target: int):
    """``-log softmax(logits)[target]`` and its gradient with respect to ``logits``."""
    z = np.asarray(logits, dtype=np.float64)
    if not 0 <= target < z.shape[0]:
        raise IndexError("target out of range")
    shifted = z - z.max()
    log_norm = np.log(np.exp(shifted).sum())
    loss = log_norm - shifted[target]
    grad = np.exp(shifted - log_norm)
    grad[target] -= 1.0
    return float(loss), grad


def softmax_xent_batch(logits, targets):
    """Mean cross-entropy over rows and gradient with respect to the logits."""
    z = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    n = z.shape[0]
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = float(np.mean(log_norm - shifted[rows, targets]))
    grad = np.exp(shifted - log_norm[:, None])
    grad[rows, targets] -= 1.0
    return loss, grad / n


def grad_check(fn, point, eps: float = 1e-5, floor: float = 1e-6) -> float:
    """Max coordinate-wise relative error between ``fn``'s gradient and central differences.

    ``fn(x)`` must return ``(value, gradient)``. The denominator of each
    relative error is ``max(|analytic|, |numeric|, floor)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.array(point, dtype=np.float64)
    _, analytic = fn(x.copy())
    analytic = np.asarray(analytic, dtype=np.float64).reshape(x.shape)
    numeric = np.zeros_like(x)
    flat = x.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp, _ = fn(x.copy())
        flat[i] = orig - eps
        fm, _ = fn(x.copy())
        flat[i] = orig
        num_flat[i] = (fp - fm) / (2.0 * eps)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


@dataclass
class OptimizerState:
    algorithm: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def __post_init__(self):
        if self.algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.algorithm!r}")


def step(opt: OptimizerState, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    """Update ``params`` in place and return them."""
    if len(params) != len(grads):
        raise ShapeError("params and grads differ in length")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ShapeError(f"param shape {p.shape} vs grad shape {np.shape(g)}")
    if opt.algorithm == "sgd":
        for p, g in zip(params, grads):
            p -= opt.lr * g
        opt.step_count += 1
        return params
    if not opt.m:
        opt.m = [np.zeros_like(p) for p in params]
        opt.v = [np.zeros_like(p) for p in params]
    opt.step_count += 1
    t = opt.step_count
    c1 = 1.0 - opt.beta1**t
    c2 = 1.0 - opt.beta2**t
    for p, g, m, v in zip(params, grads, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.lr * (m / c1) / (np.sqrt(v / c2) + opt.eps)
    return params


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def layer_to_json(layer: DenseLayer) -> dict:
    return {
        "shape": list(layer.weight.shape),
        "activation": layer.activation,
        "weight": layer.weight.ravel().tolist(),
        "bias": layer.bias.tolist(),
    }


def layer_from_json(doc: dict) -> DenseLayer:
    shape = tuple(doc["shape"])
    return DenseLayer(np.array(doc["weight"]).reshape(shape), np.array(doc["bias"]), doc["activation"])


def save_checkpoint(path, layers: dict[str, list[DenseLayer]], meta: dict | None = None) -> None:
    doc = {
        "version": CHECKPOINT_VERSION,
        "meta": meta or {},
        "groups": {k: [layer_to_json(l) for l in v] for k, v in layers.items()},
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_checkpoint(path) -> tuple[dict[str, list[DenseLayer]], dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    return {k: [layer_from_json(l) for l in v] for k, v in doc["groups"].items()}, doc["meta"]
