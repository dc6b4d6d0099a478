"""Skip-gram with negative sampling over walk corpora, and the node2vec composition."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .embedding import EmbeddingMatrix
from .kg import UNDIRECTED, KnowledgeGraph, build_adjacency
from .walks import AliasTable, WalkConfig, generate_walks


@dataclass(frozen=True)
class SgnsConfig:
    window: int = 10
    negatives: int = 5
    epochs: int = 1
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    # word2vec-style random shrinking of the window per center position
    shrink_window: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sgns_loss_grad(center, context, negatives):
    """Loss and gradients for one ``(center, context, negatives)`` tuple.

    ``loss = -log s(u.v) - sum_k log s(-u.n_k)`` with ``u`` the center vector,
    ``v`` the context vector and ``n_k`` the rows of ``negatives``.
    Returns ``(loss, d_center, d_context, d_negatives)``.
    """
    u = np.asarray(center, dtype=np.float64)
    v = np.asarray(context, dtype=np.float64)
    neg = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    pos_score = u @ v
    neg_score = neg @ u
    loss = _softplus(-pos_score) + _softplus(neg_score).sum()
    gp = _sigmoid(pos_score) - 1.0
    gn = _sigmoid(neg_score)
    d_center = gp * v + gn @ neg
    d_context = gp * u
    d_neg = gn[:, None] * u[None, :]
    return float(loss), d_center, d_context, d_neg


def noise_distribution(corpus_counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    w = np.asarray(corpus_counts, dtype=np.float64) ** power
    return w / w.sum()


@numba.njit(cache=True, fastmath=True)
def _sgd_pair(wc, C, t, label, lr, grad, want_loss):
    d = wc.shape[0]
    ct = C[t]
    dot = 0.0
    for a in range(d):
        dot += wc[a] * ct[a]
    z = dot if label > 0.5 else -dot
    # z is the margin; loss = softplus(-z), step = lr * s(-z) signed by label
    if z > 30.0:
        s_neg = 0.0
    elif z < -30.0:
        s_neg = 1.0
    else:
        s_neg = 1.0 / (1.0 + np.exp(z))
    loss = 0.0
    if want_loss:
        loss = np.log1p(np.exp(-z)) if z > -30.0 else -z
    g = s_neg * lr if label > 0.5 else -s_neg * lr
    for a in range(d):
        grad[a] += g * ct[a]
        ct[a] += g * wc[a]
    return loss


@numba.njit(cache=True, fastmath=True)
def _train_kernel(tokens, offsets, W, C, noise_prob, noise_alias, window, negatives,
                  epochs, lr0, lr_min, shrink, seed):
    np.random.seed(seed)
    n_walks = offsets.shape[0] - 1
    d = W.shape[1]
    m = noise_prob.shape[0]
    total = epochs * tokens.shape[0]
    done = 0
    grad = np.zeros(d)
    wc = np.zeros(d)
    epoch_loss = np.zeros(epochs)
    epoch_pairs = np.zeros(epochs)
    for ep in range(epochs):
        for wi in range(n_walks):
            lo = offsets[wi]
            hi = offsets[wi + 1]
            for j in range(lo, hi):
                lr = lr0 - (lr0 - lr_min) * done / total
                if lr < lr_min:
                    lr = lr_min
                done += 1
                c = tokens[j]
                b = np.random.randint(0, window) if shrink else 0
                start = j - window + b
                if start < lo:
                    start = lo
                stop = j + window - b + 1
                if stop > hi:
                    stop = hi
                for k in range(start, stop):
                    if k == j:
                        continue
                    ctx = tokens[k]
                    grad[:] = 0.0
                    wc[:] = W[c]
                    # loss is tracked on a fixed 1-in-8 subsample of centers
                    want = (j & 7) == 0
                    loss = _sgd_pair(wc, C, ctx, 1.0, lr, grad, want)
                    for _ in range(negatives):
                        x = np.random.random() * m
                        r = int(x)
                        if r >= m:
                            r = m - 1
                        t = r if x - r < noise_prob[r] else noise_alias[r]
                        if t == ctx:
                            continue
                        loss += _sgd_pair(wc, C, t, 0.0, lr, grad, want)
                    for a in range(d):
                        W[c, a] += grad[a]
                    if want:
                        epoch_loss[ep] += loss
                        epoch_pairs[ep] += 1.0
    return epoch_loss, epoch_pairs


@numba.njit(cache=True)
def _single_step(W, C, c, ctx, negs, lr):
    grad = np.zeros(W.shape[1])
    wc = W[c].copy()
    _sgd_pair(wc, C, ctx, 1.0, lr, grad, False)
    for t in negs:
        _sgd_pair(wc, C, t, 0.0, lr, grad, False)
    for a in range(W.shape[1]):
        W[c, a] += grad[a]


def sgd_step(W, C, center: int, context: int, negatives, lr: float) -> None:
    """Apply one in-place SGD update exactly as the training kernel does."""
    _single_step(W, C, int(center), int(context), np.asarray(negatives, dtype=np.int64), float(lr))


@dataclass
class SgnsResult:
    embedding: EmbeddingMatrix
    context: np.ndarray
    epoch_loss: np.ndarray


def train_sgns(corpus, n_nodes: int, cfg: SgnsConfig = SgnsConfig(), dim: int = 64) -> SgnsResult:
    """Train center/context vectors on a walk corpus; returns the center matrix.

    Rows of nodes that never occur in the corpus keep their initialization
    and are flagged in ``embedding.untrained``.
    """
    walks = [w for w in corpus if len(w) > 0]
    if not walks:
        raise ValueError("corpus is empty")
    lengths = np.array([len(w) for w in walks], dtype=np.int64)
    offsets = np.zeros(len(walks) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    tokens = np.fromiter((v for w in walks for v in w), dtype=np.int64, count=int(offsets[-1]))
    if tokens.min() < 0 or tokens.max() >= n_nodes:
        raise ValueError("corpus contains out-of-range node indices")

    rng = np.random.default_rng(cfg.seed)
    W = (rng.random((n_nodes, dim)) - 0.5) / dim
    C = np.zeros((n_nodes, dim))
    counts = np.bincount(tokens, minlength=n_nodes)
    table = AliasTable(noise_distribution(counts))
    kernel_seed = int(rng.integers(0, 2**31 - 1))
    loss, pairs = _train_kernel(
        tokens, offsets, W, C,
        np.asarray(table.prob), np.asarray(table.alias, dtype=np.int64),
        cfg.window, cfg.negatives, cfg.epochs,
        cfg.learning_rate, cfg.min_learning_rate, cfg.shrink_window, kernel_seed,
    )
    # a center row is updated only if its walk offers at least one context
    seen_as_center = np.zeros(n_nodes, dtype=bool)
    multi = np.repeat(lengths > 1, lengths)
    seen_as_center[tokens[multi]] = True
    emb = EmbeddingMatrix(W, "n2v", untrained=~seen_as_center)
    return SgnsResult(emb, C, loss / np.maximum(pairs, 1.0))


def node2vec(
    kg: KnowledgeGraph,
    walk_cfg: WalkConfig = WalkConfig(),
    sgns_cfg: SgnsConfig = SgnsConfig(),
    dim: int = 64,
    mode: str = UNDIRECTED,
) -> EmbeddingMatrix:
    adj = build_adjacency(kg, mode)
    walks = generate_walks(adj, walk_cfg)
    if not walks:
        rng = np.random.default_rng(sgns_cfg.seed)
        W = (rng.random((kg.n_nodes, dim)) - 0.5) / dim
        return EmbeddingMatrix(W, "n2v", untrained=np.ones(kg.n_nodes, dtype=bool))
    return train_sgns(walks, kg.n_nodes, sgns_cfg, dim).embedding
