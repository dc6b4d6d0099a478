"""Deterministic structural node features: weighted degree, PageRank, betweenness."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .kg import UNDIRECTED, AdjacencyView, KnowledgeGraph, build_adjacency

COMPONENTS = ("degree", "pagerank", "betweenness")


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PageRankResult:
    scores: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class CentralityVector:
    """Per-node structural features, one column per entry of ``components``."""

    values: np.ndarray
    components: tuple[str, ...]
    normalized: bool
    converged: bool = True

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.components.index(name)]

    @property
    def dim(self) -> int:
        return len(self.components)


def degree(adj: AdjacencyView) -> np.ndarray:
    """Weighted degree: sum of cumulative neighbor weights."""
    n = adj.n_nodes
    rows = np.repeat(np.arange(n), adj.degree_counts())
    return np.bincount(rows, weights=adj.weights, minlength=n).astype(np.float64)


def pagerank_full(
    adj: AdjacencyView, damping: float = 0.85, tol: float = 1e-8, max_iter: int = 100
) -> PageRankResult:
    """Power iteration on the weighted transition matrix.

    Dangling mass and teleport are spread uniformly. Stops when the L1 change
    between iterates drops below ``tol``.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must be in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = adj.n_nodes
    if n == 0:
        return PageRankResult(np.zeros(0), 0, True)
    out_w = degree(adj)
    dangling = out_w == 0
    # column-stochastic transpose: x_new = d * P^T x
    pt = adj.to_scipy().T.tocsr()
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / out_w[~dangling]

    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = damping * (pt @ (x * inv))
        new += (damping * x[dangling].sum() + (1.0 - damping)) / n
        err = np.abs(new - x).sum()
        x = new
        if err < tol:
            converged = True
            break
    return PageRankResult(x / x.sum(), it, converged)


def pagerank(adj: AdjacencyView, damping: float = 0.85, tol: float = 1e-8, max_iter: int = 100) -> np.ndarray:
    res = pagerank_full(adj, damping, tol, max_iter)
    if not res.converged:
        warnings.warn(f"PageRank did not converge in {max_iter} iterations", ConvergenceWarning, stacklevel=2)
    return res.scores


@numba.njit(cache=True)
def _brandes_csr(indptr, indices, rindptr, rindices):
    n = indptr.shape[0] - 1
    cb = np.zeros(n)
    sigma = np.zeros(n)
    dist = np.empty(n, dtype=np.int64)
    delta = np.zeros(n)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        sigma[:] = 0.0
        dist[:] = -1
        delta[:] = 0.0
        sigma[s] = 1.0
        dist[s] = 0
        head = 0
        tail = 1
        order[0] = s
        while head < tail:
            v = order[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if w == v:
                    continue
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for i in range(tail - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(rindptr[w], rindptr[w + 1]):
                v = rindices[k]
                if v != w and dist[v] >= 0 and dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            cb[w] += delta[w]
    return cb


def _brandes_exact(adj: AdjacencyView) -> list:
    n = adj.n_nodes
    nbrs = [[x for x in lst if x != v] for v, lst in enumerate(adj.neighbor_lists())]
    cb = [Fraction(0)] * n
    for s in range(n):
        stack = []
        preds = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [Fraction(0)] * n
        while stack:
            w = stack.pop()
            coeff = (1 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    return cb


def betweenness(adj: AdjacencyView, *, normalized: bool = False, exact: bool = False):
    """Brandes betweenness with unweighted BFS shortest paths.

    Self-loops are ignored. In undirected mode each unordered pair is counted
    once. With ``exact=True`` path counts are Python ints, dependencies are
    ``Fraction`` and a list of fractions is returned; otherwise a float array
    from the compiled kernel.
    """
    n = adj.n_nodes
    if exact:
        cb = _brandes_exact(adj)
    else:
        rev = adj.to_scipy().T.tocsr() if adj.mode != UNDIRECTED else None
        rindptr = adj.indptr if rev is None else rev.indptr.astype(np.int64)
        rindices = adj.indices if rev is None else rev.indices.astype(np.int64)
        cb = _brandes_csr(adj.indptr, adj.indices, rindptr, rindices)

    if adj.mode == UNDIRECTED:
        cb = [c / 2 for c in cb] if exact else cb / 2.0
    if normalized and n > 2:
        scale = Fraction((n - 1) * (n - 2))
        if adj.mode == UNDIRECTED:
            scale /= 2
        cb = [c / scale for c in cb] if exact else cb / float(scale)
    return cb


def minmax(col: np.ndarray) -> np.ndarray:
    if col.size == 0 or col.max() == col.min():
        return np.zeros_like(col)
    lo, hi = col.min(), col.max()
    return (col - lo) / (hi - lo)


def centrality_vector(
    kg: KnowledgeGraph,
    *,
    mode: str = UNDIRECTED,
    components: tuple[str, ...] = COMPONENTS,
    normalize: bool = True,
    normalize_betweenness: bool = True,
    damping: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 100,
    adj: AdjacencyView | None = None,
) -> CentralityVector:
    """Assemble per-node structural features; optionally min-max scale each column."""
    unknown = set(components) - set(COMPONENTS)
    if unknown:
        raise ValueError(f"unknown centrality components {sorted(unknown)}")
    adj = adj if adj is not None else build_adjacency(kg, mode)
    cols = []
    converged = True
    for name in components:
        if name == "degree":
            col = degree(adj)
        elif name == "pagerank":
            res = pagerank_full(adj, damping, tol, max_iter)
            converged = res.converged
            col = res.scores
        else:
            col = betweenness(adj, normalized=normalize_betweenness)
        cols.append(minmax(col) if normalize else col)
    values = np.column_stack(cols) if cols else np.zeros((adj.n_nodes, 0))
    return CentralityVector(values=values, components=tuple(components), normalized=normalize, converged=converged)
