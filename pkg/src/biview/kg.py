"""Knowledge-graph data model, flat-file ingestion and adjacency access."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class GraphInputError(ValueError):
    """Raised for malformed or inconsistent graph input."""


@dataclass(frozen=True)
class KnowledgeGraph:
    """Typed directed multigraph with partial node labels.

    Edges are stored as parallel arrays ``src``, ``rel``, ``dst``, ``weight``.
    ``labels`` holds a class index per node, or -1 for unlabeled nodes.
    """

    node_ids: tuple[str, ...]
    relations: tuple[str, ...]
    classes: tuple[str, ...]
    src: np.ndarray
    rel: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    labels: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.node_ids)
        if len(set(self.node_ids)) != n:
            raise GraphInputError("node IDs must be unique")
        for name in ("src", "rel", "dst", "weight"):
            arr = getattr(self, name)
            if arr.shape != (self.n_edges,):
                raise GraphInputError(f"edge array {name!r} has shape {arr.shape}")
            arr.flags.writeable = False
        if self.n_edges:
            if self.src.min() < 0 or self.src.max() >= n or self.dst.min() < 0 or self.dst.max() >= n:
                raise GraphInputError("edge endpoint out of range")
            if self.rel.min() < 0 or self.rel.max() >= len(self.relations):
                raise GraphInputError("relation index out of range")
            if not np.all(np.isfinite(self.weight)) or np.any(self.weight <= 0):
                raise GraphInputError("edge weights must be finite and > 0")
        if self.labels.shape != (n,):
            raise GraphInputError("label array must have one entry per node")
        if np.any(self.labels >= len(self.classes)) or np.any(self.labels < -1):
            raise GraphInputError("label index out of range")
        self.labels.flags.writeable = False
        object.__setattr__(self, "_index", {nid: i for i, nid in enumerate(self.node_ids)})

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    def labeled_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.labels >= 0)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.node_ids == other.node_ids
            and self.relations == other.relations
            and self.classes == other.classes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.rel, other.rel)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def from_triples(triples, labels=None, *, extra_nodes=()) -> KnowledgeGraph:
    """Build a graph from ``(src, rel, dst[, weight])`` tuples and a ``{node: class}`` map.

    Node, relation and class indices follow canonical (sorted) ID order, so
    the same logical graph always receives the same indices.
    """
    labels = dict(labels or {})
    rows = []
    for t in triples:
        if len(t) == 3:
            s, r, d = t
            w = 1.0
        else:
            s, r, d, w = t
        rows.append((str(s), str(r), str(d), float(w)))

    node_set = {s for s, _, d, _ in rows} | {d for _, _, d, _ in rows}
    node_set |= {str(k) for k in labels}
    node_set |= {str(k) for k in extra_nodes}
    node_ids = tuple(sorted(node_set))
    relations = tuple(sorted({r for _, r, _, _ in rows}))
    classes = tuple(sorted({str(c) for c in labels.values()}))

    nidx = {v: i for i, v in enumerate(node_ids)}
    ridx = {v: i for i, v in enumerate(relations)}
    cidx = {v: i for i, v in enumerate(classes)}

    lab = np.full(len(node_ids), -1, dtype=np.int64)
    for k, c in labels.items():
        lab[nidx[str(k)]] = cidx[str(c)]

    return KnowledgeGraph(
        node_ids=node_ids,
        relations=relations,
        classes=classes,
        src=np.array([nidx[s] for s, _, _, _ in rows], dtype=np.int64),
        rel=np.array([ridx[r] for _, r, _, _ in rows], dtype=np.int64),
        dst=np.array([nidx[d] for _, _, d, _ in rows], dtype=np.int64),
        weight=np.array([w for _, _, _, w in rows], dtype=np.float64),
        labels=lab,
    )


def _read_csv(path, required, optional=()):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            return
        missing = [c for c in required if c not in header]
        if missing:
            raise GraphInputError(f"{path}:1: missing column(s) {missing}")
        cols = {c: header.index(c) for c in (*required, *optional) if c in header}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise GraphInputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, {c: row[i].strip() for c, i in cols.items()}


def ingest(edge_file, label_file, *, default_weight: float = 1.0) -> KnowledgeGraph:
    """Read an edge CSV (``src,rel,dst[,weight]``) and a label CSV (``node,class``)."""
    triples = []
    for lineno, rec in _read_csv(edge_file, ("src", "rel", "dst"), ("weight",)):
        if not rec["src"] or not rec["dst"] or not rec["rel"]:
            raise GraphInputError(f"{edge_file}:{lineno}: empty src/rel/dst field")
        raw = rec.get("weight", "")
        if raw == "":
            w = default_weight
        else:
            try:
                w = float(raw)
            except ValueError:
                raise GraphInputError(f"{edge_file}:{lineno}: weight {raw!r} is not a number") from None
        if not np.isfinite(w) or w <= 0:
            raise GraphInputError(f"{edge_file}:{lineno}: weight must be positive, got {raw!r}")
        triples.append((rec["src"], rec["rel"], rec["dst"], w))

    labels: dict[str, str] = {}
    for lineno, rec in _read_csv(label_file, ("node", "class")):
        node, cls = rec["node"], rec["class"]
        if not node or not cls:
            raise GraphInputError(f"{label_file}:{lineno}: empty node/class field")
        prev = labels.get(node)
        if prev is not None and prev != cls:
            raise GraphInputError(
                f"{label_file}:{lineno}: node {node!r} labeled {cls!r} but already {prev!r}"
            )
        labels[node] = cls
    return from_triples(triples, labels)


def to_json(kg: KnowledgeGraph) -> dict:
    return {
        "format": FORMAT_VERSION,
        "nodes": list(kg.node_ids),
        "relations": list(kg.relations),
        "classes": list(kg.classes),
        "edges": [
            [int(s), int(r), int(d), float(w)]
            for s, r, d, w in zip(kg.src, kg.rel, kg.dst, kg.weight)
        ],
        "labels": {kg.node_ids[i]: int(kg.labels[i]) for i in kg.labeled_nodes()},
    }


def from_json(doc: dict) -> KnowledgeGraph:
    if doc.get("format") != FORMAT_VERSION:
        raise GraphInputError(f"unsupported graph format {doc.get('format')!r}")
    nodes = tuple(doc["nodes"])
    idx = {v: i for i, v in enumerate(nodes)}
    lab = np.full(len(nodes), -1, dtype=np.int64)
    for k, c in doc["labels"].items():
        lab[idx[k]] = c
    edges = doc["edges"]
    arr = np.array(edges, dtype=np.float64).reshape(-1, 4)
    return KnowledgeGraph(
        node_ids=nodes,
        relations=tuple(doc["relations"]),
        classes=tuple(doc["classes"]),
        src=arr[:, 0].astype(np.int64),
        rel=arr[:, 1].astype(np.int64),
        dst=arr[:, 2].astype(np.int64),
        weight=arr[:, 3].copy(),
        labels=lab,
    )


def save(kg: KnowledgeGraph, path) -> None:
    Path(path).write_text(json.dumps(to_json(kg), sort_keys=True) + "\n", encoding="utf-8")


def load(path) -> KnowledgeGraph:
    return from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def class_counts(kg: KnowledgeGraph) -> dict[int, int]:
    """Histogram of labeled nodes per class index."""
    return dict(sorted(Counter(int(c) for c in kg.labels if c >= 0).items()))


# ---------------------------------------------------------------------------
# adjacency
# ---------------------------------------------------------------------------

DIRECTED = "directed"
UNDIRECTED = "undirected"


@dataclass(frozen=True)
class AdjacencyView:
    """CSR adjacency with cumulative weights per neighbor pair.

    ``indices[indptr[v]:indptr[v+1]]`` are the sorted, duplicate-free
    neighbors of ``v``; ``weights`` holds the matching summed edge weights.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    mode: str

    @property
    def n_nodes(self) -> int:
        return self.indptr.shape[0] - 1

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self.weights[self.indptr[v] : self.indptr[v + 1]]

    def degree_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, v: int, x: int) -> bool:
        nb = self.neighbors(v)
        i = np.searchsorted(nb, x)
        return bool(i < nb.shape[0] and nb[i] == x)

    def weight(self, v: int, x: int) -> float:
        nb = self.neighbors(v)
        i = np.searchsorted(nb, x)
        if i < nb.shape[0] and nb[i] == x:
            return float(self.neighbor_weights(v)[i])
        return 0.0

    def to_scipy(self):
        from scipy.sparse import csr_matrix

        n = self.n_nodes
        return csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))

    def neighbor_lists(self) -> list[list[int]]:
        ind = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [ind[ptr[v] : ptr[v + 1]] for v in range(self.n_nodes)]


def build_adjacency(kg: KnowledgeGraph, mode: str = UNDIRECTED) -> AdjacencyView:
    if mode not in (DIRECTED, UNDIRECTED):
        raise ValueError(f"unknown direction mode {mode!r}")
    src, dst, w = kg.src, kg.dst, kg.weight
    if mode == UNDIRECTED:
        # a self-loop is one edge, not two
        off = src != dst
        src, dst, w = (
            np.concatenate([src, dst[off]]),
            np.concatenate([dst, src[off]]),
            np.concatenate([w, w[off]]),
        )
    n = kg.n_nodes
    key = src * n + dst
    uniq, inv = np.unique(key, return_inverse=True)
    summed = np.zeros(uniq.shape[0])
    np.add.at(summed, inv, w)
    rows = uniq // n
    cols = uniq % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    for arr in (indptr, cols, summed):
        arr.flags.writeable = False
    return AdjacencyView(indptr=indptr, indices=cols.astype(np.int64), weights=summed, mode=mode)
