"""Second-order biased random walks (node2vec transition model)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import AdjacencyView


@dataclass(frozen=True)
class WalkConfig:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 80
    walks_per_node: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if self.walks_per_node < 0:
            raise ValueError("walks_per_node must be >= 0")


class AliasTable:
    """Vose alias table for O(1) sampling from a fixed discrete distribution."""

    __slots__ = ("prob", "alias", "size")

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("alias table needs a non-empty 1-D weight vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ValueError("weights must be finite, non-negative and not all zero")
        k = w.size
        scaled = (w / w.sum() * k).tolist()
        prob = [1.0] * k
        alias = list(range(k))
        small = [i for i, s in enumerate(scaled) if s < 1.0]
        large = [i for i, s in enumerate(scaled) if s >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.size = k

    def draw(self, u: float) -> int:
        """Map one uniform ``u`` in [0, 1) to an outcome index."""
        x = u * self.size
        i = int(x)
        if i >= self.size:
            i = self.size - 1
        return i if x - i < self.prob[i] else self.alias[i]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x = rng.random(size) * self.size
        i = np.minimum(x.astype(np.int64), self.size - 1)
        prob = np.asarray(self.prob)
        alias = np.asarray(self.alias)
        return np.where(x - i < prob[i], i, alias[i])

    def probabilities(self) -> np.ndarray:
        """Exact outcome probabilities implied by the table."""
        out = np.zeros(self.size)
        for i in range(self.size):
            out[i] += self.prob[i]
            out[self.alias[i]] += 1.0 - self.prob[i]
        return out / self.size


def search_bias(adj_sets, t: int, x: int, p: float, q: float) -> float:
    if x == t:
        return 1.0 / p
    if x in adj_sets[t]:
        return 1.0
    return 1.0 / q


class TransitionModel:
    """Lazily cached alias tables for first- and second-order transitions."""

    def __init__(self, adj: AdjacencyView, p: float = 1.0, q: float = 1.0):
        self.adj = adj
        self.p = p
        self.q = q
        self.nbrs = adj.neighbor_lists()
        ptr = adj.indptr.tolist()
        w = adj.weights.tolist()
        self.wts = [w[ptr[v] : ptr[v + 1]] for v in range(adj.n_nodes)]
        self.sets = [frozenset(lst) for lst in self.nbrs]
        self.first_order = p == 1.0 and q == 1.0
        self._node_tables: dict[int, AliasTable] = {}
        self._edge_tables: dict[tuple[int, int], AliasTable] = {}

    def unnormalized(self, t: int | None, v: int) -> list[float]:
        if t is None:
            return list(self.wts[v])
        p, q, sets = self.p, self.q, self.sets
        return [search_bias(sets, t, x, p, q) * w for x, w in zip(self.nbrs[v], self.wts[v])]

    def probs(self, t: int | None, v: int) -> np.ndarray:
        if not self.nbrs[v]:
            raise ValueError(f"no transition available: node {v} has no neighbors")
        w = np.asarray(self.unnormalized(t, v))
        return w / w.sum()

    def table(self, t: int | None, v: int) -> AliasTable:
        if t is None or self.first_order:
            tab = self._node_tables.get(v)
            if tab is None:
                tab = self._node_tables[v] = AliasTable(self.wts[v])
            return tab
        key = (t, v)
        tab = self._edge_tables.get(key)
        if tab is None:
            tab = self._edge_tables[key] = AliasTable(self.unnormalized(t, v))
        return tab

    def walk(self, start: int, length: int, uniforms) -> list[int]:
        nbrs = self.nbrs
        walk = [start]
        prev = None
        cur = start
        for i in range(length - 1):
            if not nbrs[cur]:
                break
            nxt = nbrs[cur][self.table(prev, cur).draw(uniforms[i])]
            walk.append(nxt)
            prev, cur = cur, nxt
        return walk


def transition_probs(adj: AdjacencyView, t: int | None, v: int, cfg: WalkConfig) -> dict[int, float]:
    """Distribution over the neighbors of ``v`` given the previous node ``t``.

    ``t=None`` gives the first-order (weight-proportional) step.
    """
    model = TransitionModel(adj, cfg.p, cfg.q)
    probs = model.probs(t, v)
    return dict(zip(model.nbrs[v], probs.tolist()))


def walk_rng(seed: int, node: int, walk_index: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, node, walk_index])


def generate_walks(adj: AdjacencyView, cfg: WalkConfig, model: TransitionModel | None = None) -> list[list[int]]:
    """``walks_per_node`` walks from every node that has a neighbor.

    Each walk draws from its own stream keyed by ``(seed, node, round)``; the
    start-node order within a round is shuffled by a stream keyed on the round.
    """
    model = model or TransitionModel(adj, cfg.p, cfg.q)
    starts = np.array([v for v in range(adj.n_nodes) if model.nbrs[v]], dtype=np.int64)
    walks = []
    for r in range(cfg.walks_per_node):
        order = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, r]).permutation(starts)
        for v in order.tolist():
            u = walk_rng(cfg.seed, v, r).random(cfg.walk_length).tolist()
            walks.append(model.walk(v, cfg.walk_length, u))
    return walks
