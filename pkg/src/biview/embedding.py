"""Dense node-indexed embedding matrices and their TSV form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fingerprint import canonical_json, content_digest, fingerprint_of

ROLES = ("n2v", "sage", "fused", "enhanced")


@dataclass
class EmbeddingMatrix:
    values: np.ndarray
    role: str
    # rows never updated by training (e.g. isolated nodes under node2vec)
    untrained: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown embedding role {self.role!r}")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("embedding matrix must be 2-D")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding matrix has non-finite entries")
        if self.untrained is None:
            self.untrained = np.zeros(self.values.shape[0], dtype=bool)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def format_tsv(emb: EmbeddingMatrix, node_ids, config: dict | None = None) -> str:
    """``node_id<TAB>v1..vd`` rows preceded by ``#key=value`` header lines.

    With ``config`` the header carries the config, its fingerprint and a
    digest of the row block so the file can be re-verified later.
    """
    if len(node_ids) != emb.n_nodes:
        raise ValueError("node_ids length does not match embedding rows")
    body = "".join(
        nid + "\t" + "\t".join(repr(float(x)) for x in row) + "\n" for nid, row in zip(node_ids, emb.values)
    )
    head = [f"#role={emb.role}"]
    if config is not None:
        head.append(f"#fingerprint={fingerprint_of(config)}")
        head.append(f"#config={canonical_json(config)}")
    if emb.untrained.any():
        head.append("#untrained=" + json.dumps([node_ids[i] for i in np.flatnonzero(emb.untrained)]))
    head.append(f"#digest={content_digest(body)}")
    return "\n".join(head) + "\n" + body


def write_tsv(path, emb: EmbeddingMatrix, node_ids, config: dict | None = None) -> None:
    Path(path).write_text(format_tsv(emb, node_ids, config), encoding="utf-8")


def read_tsv(path, node_ids=None) -> tuple[EmbeddingMatrix, list[str], dict]:
    """Parse a TSV written by :func:`write_tsv`.

    When ``node_ids`` is given, rows are reordered to match it.
    """
    meta: dict = {}
    ids, rows = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            k, _, v = line[1:].partition("=")
            meta[k] = v
            continue
        parts = line.split("\t")
        ids.append(parts[0])
        rows.append([float(x) for x in parts[1:]])
    values = np.array(rows, dtype=np.float64).reshape(len(rows), -1)
    untrained_ids = set(json.loads(meta.get("untrained", "[]")))
    if node_ids is not None:
        pos = {nid: i for i, nid in enumerate(ids)}
        missing = [nid for nid in node_ids if nid not in pos]
        if missing:
            raise ValueError(f"{path}: no embedding for nodes {missing[:5]}")
        values = values[[pos[nid] for nid in node_ids]]
        ids = list(node_ids)
    untrained = np.array([nid in untrained_ids for nid in ids], dtype=bool)
    emb = EmbeddingMatrix(values, meta.get("role", "n2v"), untrained)
    return emb, ids, meta
