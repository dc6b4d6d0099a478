"""Two-view embedding fusion: a per-node sigmoid gate and the FusionNet encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .embedding import EmbeddingMatrix


def _values(e):
    return e.values if isinstance(e, EmbeddingMatrix) else np.asarray(e, dtype=np.float64)


def _check_train(labels, train_nodes):
    train_nodes = np.asarray(train_nodes, dtype=np.int64)
    if train_nodes.size == 0:
        raise ValueError("empty train set")
    targets = np.asarray(labels)[train_nodes]
    if np.any(targets < 0):
        raise ValueError("train nodes must be labeled")
    return train_nodes, targets


# ---------------------------------------------------------------------------
# gated fusion
# ---------------------------------------------------------------------------


@dataclass
class GatedFusion:
    """``alpha = sigmoid(w . [a | s] + b)``; fused row ``alpha a + (1 - alpha) s``.

    ``proj`` (optional) maps the wider view down to the narrower one's width
    before the convex combination; ``proj_view`` names which view it applies to.
    """

    w: np.ndarray
    b: np.ndarray = 0.0
    proj: nn.DenseLayer | None = None
    proj_view: str | None = None

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64).ravel()
        # kept as a 1-element array so the optimizer can update it in place
        self.b = np.atleast_1d(np.asarray(self.b, dtype=np.float64)).copy()

    @classmethod
    def init(cls, d1: int, d2: int, rng=None) -> GatedFusion:
        proj = view = None
        if d1 != d2:
            rng = rng if rng is not None else np.random.default_rng(0)
            view = "n2v" if d1 > d2 else "sage"
            proj = nn.DenseLayer.init(max(d1, d2), min(d1, d2), "identity", rng)
        return cls(np.zeros(d1 + d2), 0.0, proj, view)

    def params(self) -> list[np.ndarray]:
        out = [self.w, self.b]
        if self.proj is not None:
            out += self.proj.params()
        return out


def _gate_forward(a, s, gate: GatedFusion):
    x = np.hstack([a, s])
    if x.shape[1] != gate.w.shape[0]:
        raise ValueError(f"gate expects {gate.w.shape[0]} concatenated dims, got {x.shape[1]}")
    alpha = nn.sigmoid(x @ gate.w + gate.b[0])
    pa, ps, pc = a, s, None
    if gate.proj is not None:
        if gate.proj_view == "n2v":
            pa, pc = gate.proj.forward(a, return_cache=True)
        else:
            ps, pc = gate.proj.forward(s, return_cache=True)
    if pa.shape[1] != ps.shape[1]:
        raise ValueError(f"view dimensions differ ({pa.shape[1]} vs {ps.shape[1]}) and no projection is set")
    fused = alpha[:, None] * pa + (1.0 - alpha[:, None]) * ps
    return fused, alpha, (x, pa, ps, pc)


def gated_fuse(n2v, sage, gate: GatedFusion) -> tuple[EmbeddingMatrix, np.ndarray]:
    a, s = _values(n2v), _values(sage)
    if a.shape[0] != s.shape[0]:
        raise ValueError("views have different node counts")
    fused, alpha, _ = _gate_forward(a, s, gate)
    return EmbeddingMatrix(fused, "fused"), alpha


def gated_loss(gate: GatedFusion, head: nn.DenseLayer, a, s, train_nodes, targets):
    """Mean cross-entropy of ``head`` on the fused rows of ``train_nodes``; gradients
    ordered as ``gate.params() + head.params()``."""
    a_t, s_t = a[train_nodes], s[train_nodes]
    fused, alpha, (x, pa, ps, pc) = _gate_forward(a_t, s_t, gate)
    logits, hc = head.forward(fused, return_cache=True)
    loss, dlogits = nn.softmax_xent_batch(logits, targets)
    dfused, head_grads = head.backward(dlogits, hc)
    dalpha = (dfused * (pa - ps)).sum(axis=1)
    dpre = dalpha * alpha * (1.0 - alpha)
    grads = [x.T @ dpre, np.array([dpre.sum()])]
    if gate.proj is not None:
        dview = alpha[:, None] * dfused if gate.proj_view == "n2v" else (1.0 - alpha[:, None]) * dfused
        _, pg = gate.proj.backward(dview, pc)
        grads += pg
    return loss, grads + head_grads


@dataclass(frozen=True)
class FusionHyper:
    hidden: int = 128
    out_dim: int = 64
    epochs: int = 100
    lr: float = 0.01
    optimizer: str = "adam"
    batch_size: int | None = None
    early_stopping: bool = False
    patience: int = 10
    seed: int = 0


@dataclass
class GatedResult:
    gate: GatedFusion
    head: nn.DenseLayer
    embedding: EmbeddingMatrix
    alpha: np.ndarray
    losses: list[float]


def _batches(train_nodes, targets, batch_size, rng):
    if batch_size is None or batch_size >= train_nodes.size:
        yield train_nodes, targets
        return
    perm = rng.permutation(train_nodes.size)
    for i in range(0, perm.size, batch_size):
        idx = perm[i : i + batch_size]
        yield train_nodes[idx], targets[idx]


def _fit(loss_fn, params, hyper: FusionHyper, train_nodes, targets, rng, val=None):
    """Shared epoch loop; ``val`` is an optional ``(nodes, targets)`` for early stopping."""
    opt = nn.OptimizerState(hyper.optimizer, hyper.lr)
    losses = []
    best, best_params, bad = np.inf, None, 0
    for _ in range(hyper.epochs):
        total, count = 0.0, 0
        for nodes, tg in _batches(train_nodes, targets, hyper.batch_size, rng):
            loss, grads = loss_fn(nodes, tg)
            nn.step(opt, params, grads)
            total += loss * nodes.size
            count += nodes.size
        losses.append(total / count)
        if hyper.early_stopping and val is not None:
            vloss, _ = loss_fn(*val)
            if vloss < best - 1e-9:
                best, best_params, bad = vloss, [p.copy() for p in params], 0
            else:
                bad += 1
                if bad >= hyper.patience:
                    break
    if best_params is not None:
        for p, q in zip(params, best_params):
            p[...] = q
    return losses


def train_gated(
    n2v, sage, labels, train_nodes, hyper: FusionHyper = FusionHyper(), val_nodes=None, n_classes: int | None = None
) -> GatedResult:
    """Jointly fit the gate and a linear softmax head on the fused rows."""
    a, s = _values(n2v), _values(sage)
    train_nodes, targets = _check_train(labels, train_nodes)
    n_classes = n_classes or int(np.max(np.asarray(labels))) + 1
    rng = np.random.default_rng(hyper.seed)
    gate = GatedFusion.init(a.shape[1], s.shape[1], rng)
    head = nn.DenseLayer.init(min(a.shape[1], s.shape[1]), n_classes, "identity", rng)
    params = gate.params() + head.params()

    def loss_fn(nodes, tg):
        return gated_loss(gate, head, a, s, nodes, tg)

    val = None
    if val_nodes is not None:
        val = _check_train(labels, val_nodes)
    losses = _fit(loss_fn, params, hyper, train_nodes, targets, rng, val)
    emb, alpha = gated_fuse(a, s, gate)
    return GatedResult(gate, head, emb, alpha, losses)


# ---------------------------------------------------------------------------
# FusionNet
# ---------------------------------------------------------------------------


class FusionNet:
    """MLP encoder over ``[z_n2v | z_sage]`` followed by a linear softmax head."""

    def __init__(self, encoder: nn.MLP, head: nn.DenseLayer):
        n_in = encoder.layers[0].n_in
        n_out = encoder.layers[-1].n_out
        if n_out >= n_in:
            raise ValueError(f"encoder must reduce dimensionality ({n_in} -> {n_out})")
        if head.n_in != n_out:
            raise nn.ShapeError("head input does not match encoder output")
        self.encoder = encoder
        self.head = head

    @classmethod
    def init(cls, in_dim: int, n_classes: int, hidden: int = 128, out_dim: int = 64, rng=None) -> FusionNet:
        rng = rng if rng is not None else np.random.default_rng(0)
        enc = nn.MLP.init([in_dim, hidden, out_dim], "relu", "identity", rng)
        return cls(enc, nn.DenseLayer.init(out_dim, n_classes, "identity", rng))

    @property
    def in_dim(self) -> int:
        return self.encoder.layers[0].n_in

    @property
    def out_dim(self) -> int:
        return self.encoder.layers[-1].n_out

    def params(self) -> list[np.ndarray]:
        return self.encoder.params() + self.head.params()

    def encode(self, zcat) -> np.ndarray:
        return self.encoder.forward(zcat)

    def loss(self, zcat, targets):
        enh, ec = self.encoder.forward(zcat, return_cache=True)
        logits, hc = self.head.forward(enh, return_cache=True)
        loss, dlogits = nn.softmax_xent_batch(logits, targets)
        denh, hg = self.head.backward(dlogits, hc)
        _, eg = self.encoder.backward(denh, ec)
        return loss, eg + hg


def concat_views(n2v, sage) -> np.ndarray:
    a, s = _values(n2v), _values(sage)
    if a.shape[0] != s.shape[0]:
        raise ValueError("views have different node counts")
    return np.hstack([a, s])


@dataclass
class FusionNetResult:
    net: FusionNet
    embedding: EmbeddingMatrix
    losses: list[float]


def fusionnet_train(
    n2v, sage, labels, train_nodes, hyper: FusionHyper = FusionHyper(), val_nodes=None, n_classes: int | None = None
) -> FusionNetResult:
    """Train encoder + head end-to-end; return the encoded rows of every node."""
    zcat = concat_views(n2v, sage)
    train_nodes, targets = _check_train(labels, train_nodes)
    n_classes = n_classes or int(np.max(np.asarray(labels))) + 1
    rng = np.random.default_rng(hyper.seed)
    net = FusionNet.init(zcat.shape[1], n_classes, hyper.hidden, hyper.out_dim, rng)

    def loss_fn(nodes, tg):
        return net.loss(zcat[nodes], tg)

    val = None
    if val_nodes is not None:
        val = _check_train(labels, val_nodes)
    losses = _fit(loss_fn, net.params(), hyper, train_nodes, targets, rng, val)
    return FusionNetResult(net, EmbeddingMatrix(net.encode(zcat), "enhanced"), losses)


def predict(model, n2v, sage, head: nn.DenseLayer | None = None) -> np.ndarray:
    """Per-node class probabilities from a FusionNet or a (GatedFusion, head) pair."""
    if isinstance(model, FusionNet):
        logits = model.head.forward(model.encode(concat_views(n2v, sage)))
    elif isinstance(model, GatedResult):
        logits = model.head.forward(gated_fuse(n2v, sage, model.gate)[0].values)
    else:
        if head is None:
            raise ValueError("a gated model needs its classifier head")
        logits = head.forward(gated_fuse(n2v, sage, model)[0].values)
    return nn.softmax(logits, axis=1)


def hard_labels(probs: np.ndarray) -> np.ndarray:
    # argmax already resolves ties to the lowest index
    return np.argmax(probs, axis=1)
