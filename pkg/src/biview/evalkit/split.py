"""Class filtering and seeded (stratified) train/test splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0
    min_samples: int = 200

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


def retained_classes(labels, min_samples: int) -> np.ndarray:
    """Class indices with at least ``min_samples`` labeled nodes."""
    lab = np.asarray(labels)
    counts = np.bincount(lab[lab >= 0]) if np.any(lab >= 0) else np.zeros(0, dtype=np.int64)
    return np.flatnonzero(counts >= min_samples)


def split(labels, spec: SplitSpec = SplitSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Return sorted ``(train_nodes, test_nodes)`` over the retained classes.

    ``labels`` is a per-node class index array (-1 = unlabeled) or anything
    with a ``labels`` attribute.
    """
    lab = np.asarray(getattr(labels, "labels", labels))
    keep = retained_classes(lab, spec.min_samples)
    if keep.size == 0:
        raise SplitError(f"no class has at least {spec.min_samples} labeled nodes")
    rng = np.random.default_rng(spec.seed)
    train, test = [], []
    if spec.stratified:
        for c in keep:
            nodes = rng.permutation(np.flatnonzero(lab == c))
            k = int(round(spec.train_fraction * nodes.size))
            if k < 1 or k >= nodes.size:
                raise SplitError(f"class {c} with {nodes.size} nodes cannot populate both sides")
            train.append(nodes[:k])
            test.append(nodes[k:])
    else:
        nodes = rng.permutation(np.flatnonzero(np.isin(lab, keep)))
        k = int(round(spec.train_fraction * nodes.size))
        if k < 1 or k >= nodes.size:
            raise SplitError("too few nodes to populate both sides")
        train.append(nodes[:k])
        test.append(nodes[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))
