"""Stochastic-block-model knowledge graphs for desk-scale experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import KnowledgeGraph, from_triples


@dataclass(frozen=True)
class SyntheticSpec:
    sizes: tuple[int, ...] = (200, 200, 200, 200)
    p_in: float = 0.1
    p_out: float = 0.005
    # 1.0: edges follow the blocks; 0.0: same density, no block structure
    informative: float = 1.0
    seed: int = 0
    relation: str = "linked_to"

    def __post_init__(self):
        for name in ("p_in", "p_out", "informative"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("every block needs at least one node")


def block_probabilities(spec: SyntheticSpec) -> np.ndarray:
    """Edge probability between every pair of blocks after mixing in structure-free density."""
    sizes = np.asarray(spec.sizes, dtype=np.float64)
    k = sizes.size
    p = np.full((k, k), spec.p_out)
    np.fill_diagonal(p, spec.p_in)
    n = sizes.sum()
    pairs = np.outer(sizes, sizes)
    np.fill_diagonal(pairs, sizes * (sizes - 1))
    p_mean = float((p * pairs).sum() / (n * (n - 1))) if n > 1 else 0.0
    return spec.informative * p + (1.0 - spec.informative) * p_mean


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> KnowledgeGraph:
    """Undirected SBM stored as one directed triple per edge (lower index first).

    Node class is the block id.
    """
    rng = np.random.default_rng(spec.seed)
    block = np.repeat(np.arange(len(spec.sizes)), spec.sizes)
    n = block.size
    probs = block_probabilities(spec)
    width = len(str(max(n - 1, 0)))
    ids = [f"n{i:0{width}d}" for i in range(n)]
    triples = []
    for i in range(n - 1):
        j = np.arange(i + 1, n)
        hit = rng.random(j.size) < probs[block[i], block[j]]
        triples.extend((ids[i], spec.relation, ids[x]) for x in j[hit].tolist())
    labels = {ids[i]: f"B{block[i]}" for i in range(n)}
    return from_triples(triples, labels)
