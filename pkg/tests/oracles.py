"""Independent reference implementations used as test oracles."""

from fractions import Fraction
from itertools import permutations

import numpy as np


def floyd_warshall(n, edges, directed=False):
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for i, j in edges:
        if i == j:
            continue
        d[i][j] = 1
        if not directed:
            d[j][i] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def _neighbor_sets(n, edges, directed):
    nbr = [set() for _ in range(n)]
    for i, j in edges:
        if i == j:
            continue
        nbr[i].add(j)
        if not directed:
            nbr[j].add(i)
    return nbr


def _enumerate(d, nbr, s, t):
    """Every shortest s-t path, listed explicitly by depth-first enumeration."""
    if d[s][t] == float("inf"):
        return []
    out = []

    def dfs(path):
        v = path[-1]
        if v == t:
            out.append(tuple(path))
            return
        for w in sorted(nbr[v]):
            if d[s][w] == len(path) and d[w][t] == d[s][t] - len(path):
                dfs(path + [w])

    dfs([s])
    return out


def shortest_paths(n, edges, s, t, directed=False):
    return _enumerate(floyd_warshall(n, edges, directed), _neighbor_sets(n, edges, directed), s, t)


def brute_betweenness(n, edges, directed=False):
    """Sum over pairs of (#shortest paths through v) / (#shortest paths), as Fractions."""
    d = floyd_warshall(n, edges, directed)
    nbr = _neighbor_sets(n, edges, directed)
    cb = [Fraction(0)] * n
    pairs = permutations(range(n), 2) if directed else ((s, t) for s in range(n) for t in range(s + 1, n))
    for s, t in pairs:
        paths = _enumerate(d, nbr, s, t)
        if not paths:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p)
            if through:
                cb[v] += Fraction(through, len(paths))
    return cb


def dense_weights(n, edges, weights=None, directed=False):
    w = np.zeros((n, n))
    for k, (i, j) in enumerate(edges):
        x = 1.0 if weights is None else weights[k]
        w[i, j] += x
        if not directed and i != j:
            w[j, i] += x
    return w


def dense_pagerank(w, damping=0.85):
    """Stationary vector of the explicit Google matrix via a linear solve."""
    n = w.shape[0]
    out = w.sum(axis=1)
    p = np.where(out[:, None] > 0, w / np.where(out > 0, out, 1.0)[:, None], 1.0 / n)
    g = damping * p + (1.0 - damping) / n
    # x^T G = x^T with sum(x) = 1
    a = g.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def random_graph(rng, n, p, directed=False):
    edges = []
    for i in range(n):
        for j in range(n) if directed else range(i + 1, n):
            if i != j and rng.random() < p:
                edges.append((i, j))
    return edges


def is_connected(n, edges):
    seen, stack = {0}, [0]
    nbr = [set() for _ in range(n)]
    for i, j in edges:
        nbr[i].add(j)
        nbr[j].add(i)
    while stack:
        v = stack.pop()
        for w in nbr[v] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n
