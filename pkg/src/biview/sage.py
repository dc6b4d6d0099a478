"""Structurally enriched input features and a supervised mean-aggregator GraphSAGE."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import nn
from .centrality import CentralityVector
from .embedding import EmbeddingMatrix
from .kg import UNDIRECTED, AdjacencyView, KnowledgeGraph

NORM_EPS = 1e-12


@dataclass
class FeatureMatrix:
    values: np.ndarray
    # block name -> (start, stop) column range
    blocks: dict[str, tuple[int, int]]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def block(self, name: str) -> np.ndarray:
        a, b = self.blocks[name]
        return self.values[:, a:b]


def label_onehot(kg: KnowledgeGraph, mask=()) -> np.ndarray:
    out = np.zeros((kg.n_nodes, kg.n_classes))
    lab = np.asarray(kg.labels)
    rows = np.flatnonzero(lab >= 0)
    out[rows, lab[rows]] = 1.0
    mask = np.asarray(list(mask), dtype=np.int64)
    if mask.size:
        out[mask] = 0.0
    return out


def assemble_features(
    kg: KnowledgeGraph,
    n2v: EmbeddingMatrix | None,
    cent: CentralityVector | None,
    mask=(),
    *,
    labels: bool = True,
) -> FeatureMatrix:
    """Concatenate ``[label one-hot | node2vec | centrality]`` per node.

    Nodes in ``mask`` get an all-zero label block. Disabled or missing blocks
    are simply left out of the layout.
    """
    parts, blocks, off = [], {}, 0
    for name, arr in (
        ("label", label_onehot(kg, mask) if labels else None),
        ("n2v", None if n2v is None else n2v.values),
        ("centrality", None if cent is None else cent.values),
    ):
        if arr is None:
            continue
        if arr.shape[0] != kg.n_nodes:
            raise ValueError(f"{name} block has {arr.shape[0]} rows for {kg.n_nodes} nodes")
        parts.append(np.asarray(arr, dtype=np.float64))
        blocks[name] = (off, off + arr.shape[1])
        off += arr.shape[1]
    values = np.hstack(parts) if parts else np.zeros((kg.n_nodes, 0))
    return FeatureMatrix(values, blocks)


def mean_operator(adj: AdjacencyView) -> sp.csr_matrix:
    """Row-stochastic sparse matrix averaging each node's neighbor rows.

    In directed mode the neighborhood of ``v`` is its in-neighbors, i.e. the
    sources of edges ``(u, r, v)``. Isolated rows are all zero.
    """
    a = adj.to_scipy()
    if adj.mode != UNDIRECTED:
        a = a.T.tocsr()
    a = a.tocsr(copy=True)
    a.data = np.ones_like(a.data)
    deg = np.asarray(a.sum(axis=1)).ravel()
    inv = np.zeros_like(deg)
    inv[deg > 0] = 1.0 / deg[deg > 0]
    return sp.diags(inv) @ a


def sampled_mean_operator(adj: AdjacencyView, sample_size: int, rng: np.random.Generator) -> sp.csr_matrix:
    """Like :func:`mean_operator` but over at most ``sample_size`` uniformly drawn neighbors."""
    full = mean_operator(adj)
    rows, cols = [], []
    for v in range(full.shape[0]):
        nb = full.indices[full.indptr[v] : full.indptr[v + 1]]
        if nb.size > sample_size:
            nb = np.sort(rng.choice(nb, size=sample_size, replace=False))
        rows.extend([v] * nb.size)
        cols.extend(nb.tolist())
    rows = np.asarray(rows, dtype=np.int64)
    cnt = np.bincount(rows, minlength=full.shape[0]).astype(np.float64)
    data = 1.0 / cnt[rows] if rows.size else np.zeros(0)
    return sp.csr_matrix((data, (rows, np.asarray(cols, dtype=np.int64))), shape=full.shape)


def aggregate_mean(features: np.ndarray, adj: AdjacencyView, v: int) -> np.ndarray:
    """Unweighted mean of ``v``'s neighbor rows; zero vector when ``v`` has none."""
    if adj.mode == UNDIRECTED:
        nb = adj.neighbors(v)
    else:
        nb = np.flatnonzero(adj.to_scipy()[:, v].toarray().ravel())
    if nb.size == 0:
        return np.zeros(features.shape[1])
    return features[nb].mean(axis=0)


@dataclass
class SageModel:
    layers: list[nn.DenseLayer]
    head: nn.DenseLayer
    sample_sizes: list[int | None] = field(default_factory=list)
    normalize: bool = True

    @classmethod
    def init(
        cls,
        in_dim: int,
        n_classes: int,
        dims=(64, 64),
        hidden_activation: str = "relu",
        out_activation: str = "identity",
        normalize: bool = True,
        rng=None,
    ) -> SageModel:
        rng = rng if rng is not None else np.random.default_rng(0)
        layers = []
        prev = in_dim
        for i, d in enumerate(dims):
            act = out_activation if i == len(dims) - 1 else hidden_activation
            layers.append(nn.DenseLayer.init(2 * prev, d, act, rng))
            prev = d
        head = nn.DenseLayer.init(prev, n_classes, "identity", rng)
        return cls(layers, head, [None] * len(dims), normalize)

    @property
    def out_dim(self) -> int:
        return self.layers[-1].n_out

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()] + self.head.params()


def _l2_normalize(h):
    norm = np.sqrt((h * h).sum(axis=1, keepdims=True))
    return h / np.maximum(norm, NORM_EPS), norm


def sage_forward(model: SageModel, features, adj_or_ops, *, return_cache: bool = False):
    """K rounds of ``h <- act(W [h | mean_nbr(h)] + b)``; final rows L2-normalized.

    ``adj_or_ops`` is an :class:`AdjacencyView` or a list of per-layer mean
    operators (used for neighbor sampling).
    """
    h = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    if isinstance(adj_or_ops, AdjacencyView):
        ops = [mean_operator(adj_or_ops)] * len(model.layers)
    else:
        ops = list(adj_or_ops)
    if h.shape[1] * 2 != model.layers[0].n_in:
        raise nn.ShapeError(f"feature dim {h.shape[1]} does not match model input {model.layers[0].n_in // 2}")
    hs = [h]
    caches = []
    for layer, m in zip(model.layers, ops):
        cat = np.hstack([h, m @ h])
        h, c = layer.forward(cat, return_cache=True)
        caches.append(c)
        hs.append(h)
    norm = None
    if model.normalize:
        h, norm = _l2_normalize(h)
    if return_cache:
        return h, {"hs": hs, "caches": caches, "ops": ops, "norm": norm, "out": h}
    return h


def sage_backward(model: SageModel, d_out: np.ndarray, cache) -> list[np.ndarray]:
    """Parameter gradients of the aggregation layers given ``dL/d(output)``."""
    g = d_out
    if model.normalize:
        y, norm = cache["out"], cache["norm"]
        g = (g - y * (y * g).sum(axis=1, keepdims=True)) / np.maximum(norm, NORM_EPS)
    grads = []
    for layer, c, m, h_prev in zip(
        reversed(model.layers), reversed(cache["caches"]), reversed(cache["ops"]), reversed(cache["hs"][:-1])
    ):
        dcat, lg = layer.backward(g, c)
        d = h_prev.shape[1]
        g = dcat[:, :d] + m.T @ dcat[:, d:]
        grads = lg + grads
    return grads


def sage_loss(model: SageModel, features, ops, train_nodes, targets):
    """Mean softmax cross-entropy of the head over ``train_nodes``, plus gradients."""
    z, cache = sage_forward(model, features, ops, return_cache=True)
    train_nodes = np.asarray(train_nodes, dtype=np.int64)
    logits, hc = model.head.forward(z[train_nodes], return_cache=True)
    loss, dlogits = nn.softmax_xent_batch(logits, targets)
    dz_train, head_grads = model.head.backward(dlogits, hc)
    dz = np.zeros_like(z)
    np.add.at(dz, train_nodes, dz_train)
    grads = sage_backward(model, dz, cache) + head_grads
    return loss, grads


@dataclass(frozen=True)
class SageHyper:
    dims: tuple[int, ...] = (64, 64)
    epochs: int = 50
    lr: float = 0.01
    optimizer: str = "adam"
    sample_sizes: tuple[int | None, ...] | None = None
    normalize: bool = True
    seed: int = 0


@dataclass
class SageResult:
    model: SageModel
    embedding: EmbeddingMatrix
    losses: list[float]
    layer_outputs: list[np.ndarray]


def train_sage(
    kg: KnowledgeGraph,
    features: FeatureMatrix,
    adj: AdjacencyView,
    train_nodes,
    hyper: SageHyper = SageHyper(),
) -> SageResult:
    """Fit the aggregation layers and head on the labels of ``train_nodes``.

    Returns the final-layer embedding of every node (full-neighborhood pass).
    """
    train_nodes = np.asarray(train_nodes, dtype=np.int64)
    if train_nodes.size == 0:
        raise ValueError("empty train set")
    targets = np.asarray(kg.labels)[train_nodes]
    if np.any(targets < 0):
        raise ValueError("train nodes must be labeled")
    rng = np.random.default_rng(hyper.seed)
    model = SageModel.init(features.dim, kg.n_classes, hyper.dims, normalize=hyper.normalize, rng=rng)
    if hyper.sample_sizes is not None:
        if len(hyper.sample_sizes) != len(hyper.dims):
            raise ValueError("one sample size per layer is required")
        model.sample_sizes = list(hyper.sample_sizes)
    full = mean_operator(adj)
    opt = nn.OptimizerState(hyper.optimizer, hyper.lr)
    params = model.params()
    losses = []
    for _ in range(hyper.epochs):
        ops = [full if s is None else sampled_mean_operator(adj, s, rng) for s in model.sample_sizes]
        loss, grads = sage_loss(model, features, ops, train_nodes, targets)
        nn.step(opt, params, grads)
        losses.append(loss)
    z, cache = sage_forward(model, features, adj, return_cache=True)
    return SageResult(model, EmbeddingMatrix(z, "sage"), losses, cache["hs"])


def influence_score(h_prev: np.ndarray, adj: AdjacencyView, v: int) -> float:
    """Mean L2 distance between ``v`` and its neighbors in ``h_prev``."""
    nb = adj.neighbors(v)
    if nb.size == 0:
        raise ValueError(f"node {v} is isolated")
    diff = h_prev[nb] - h_prev[v]
    return float(np.sqrt((diff * diff).sum(axis=1)).mean())


def influence_scores(h_prev: np.ndarray, adj: AdjacencyView) -> np.ndarray:
    """Influence score of every node; NaN for isolated nodes."""
    out = np.full(adj.n_nodes, np.nan)
    for v in range(adj.n_nodes):
        if adj.neighbors(v).size:
            out[v] = influence_score(h_prev, adj, v)
    return out
