"""End-to-end three-arm comparison: node2vec-only, GraphSAGE-only, Bi-View."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import centrality as cen
from . import kg as kgmod
from .config import RunConfig
from .embedding import EmbeddingMatrix, format_tsv
from .fingerprint import canonical_json, content_digest, fingerprint_of
from .evalkit import compare_models, evaluate, fit_tree, pca2, split, to_csv, to_text
from .evalkit.metrics import EvalReport
from .fusion import fusionnet_train, train_gated
from .sage import assemble_features, train_sage
from .sgns import train_sgns
from .walks import generate_walks

log = logging.getLogger(__name__)

ARMS = ("node2vec", "graphsage", "biview")


class StageError(RuntimeError):
    """Failure inside a pipeline stage; ``stage`` names where it happened."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


@dataclass
class PipelineResult:
    config: RunConfig
    kg: kgmod.KnowledgeGraph
    train_nodes: np.ndarray
    test_nodes: np.ndarray
    retained: np.ndarray
    centrality: cen.CentralityVector
    embeddings: dict[str, EmbeddingMatrix]
    reports: dict[str, EvalReport]
    pca: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    def comparison(self) -> list[dict]:
        return compare_models(self.reports)


def label_mask(cfg: RunConfig, test_nodes) -> np.ndarray:
    """Nodes whose label block is zeroed in the GraphSAGE input."""
    if cfg.paper_faithful:
        return np.zeros(0, dtype=np.int64)
    return np.asarray(test_nodes, dtype=np.int64)


def compute_centrality(kg, cfg: RunConfig, adj=None) -> cen.CentralityVector:
    c = cfg.effective_centrality()
    return cen.centrality_vector(
        kg,
        mode=cfg.direction,
        components=c.components,
        normalize=c.normalize,
        normalize_betweenness=c.normalize_betweenness,
        damping=c.damping,
        tol=c.tol,
        max_iter=c.max_iter,
        adj=adj,
    )


def compute_node2vec(kg, cfg: RunConfig, adj=None) -> EmbeddingMatrix:
    adj = adj if adj is not None else kgmod.build_adjacency(kg, cfg.direction)
    walks = generate_walks(adj, cfg.walk_config())
    if not walks:
        raise ValueError("graph has no edges; node2vec has nothing to walk")
    return train_sgns(walks, kg.n_nodes, cfg.sgns_config(), cfg.node2vec.dim).embedding


def compute_sage(kg, n2v, cent, train_nodes, test_nodes, cfg: RunConfig, adj=None):
    adj = adj if adj is not None else kgmod.build_adjacency(kg, cfg.direction)
    feats = assemble_features(kg, n2v, cent, label_mask(cfg, test_nodes))
    return train_sage(kg, feats, adj, train_nodes, cfg.sage_hyper())


def compute_fusion(kg, n2v, sage, train_nodes, cfg: RunConfig) -> EmbeddingMatrix:
    if cfg.fusion.variant == "fusionnet":
        res = fusionnet_train(n2v, sage, kg.labels, train_nodes, cfg.fusion_hyper(), n_classes=kg.n_classes)
    elif cfg.fusion.variant == "gated":
        res = train_gated(n2v, sage, kg.labels, train_nodes, cfg.fusion_hyper(), n_classes=kg.n_classes)
    else:
        raise ValueError(f"unknown fusion variant {cfg.fusion.variant!r}")
    return res.embedding


def classify(emb: EmbeddingMatrix, kg, train_nodes, test_nodes, retained, cfg: RunConfig):
    """Fit the decision tree on train rows, evaluate on test rows over the retained classes."""
    remap = {int(c): i for i, c in enumerate(retained)}
    ytr = np.array([remap[int(c)] for c in kg.labels[train_nodes]], dtype=np.int64)
    yte = np.array([remap[int(c)] for c in kg.labels[test_nodes]], dtype=np.int64)
    tree = fit_tree(
        emb.values[train_nodes], ytr, len(retained), cfg.tree.max_depth, cfg.tree.min_samples_leaf
    )
    pred = tree.predict(emb.values[test_nodes])
    rep = evaluate(pred, yte, [kg.classes[c] for c in retained])
    return rep, tree


def run_pipeline(kg: kgmod.KnowledgeGraph, cfg: RunConfig = RunConfig()) -> PipelineResult:
    """Run every stage with one split shared by all three arms."""
    warns = []
    with _stage("adjacency"):
        adj = kgmod.build_adjacency(kg, cfg.direction)
    with _stage("split"):
        spec = cfg.split_spec()
        train_nodes, test_nodes = split(kg.labels, spec)
        retained = np.unique(kg.labels[np.concatenate([train_nodes, test_nodes])])
    with _stage("centrality"):
        cent = compute_centrality(kg, cfg, adj)
        if not cent.converged:
            warns.append("pagerank did not converge")
    with _stage("embed-n2v"):
        n2v = compute_node2vec(kg, cfg, adj)
    with _stage("embed-sage"):
        sage = compute_sage(kg, n2v, cent, train_nodes, test_nodes, cfg, adj).embedding
    with _stage("fuse"):
        fused = compute_fusion(kg, n2v, sage, train_nodes, cfg)

    embeddings = {"node2vec": n2v, "graphsage": sage, "biview": fused}
    reports, pcas = {}, {}
    fp = cfg.fingerprint()
    evaluated = np.concatenate([train_nodes, test_nodes])
    evaluated.sort()
    for arm in ARMS:
        with _stage(f"classify-{arm}"):
            rep, _ = classify(embeddings[arm], kg, train_nodes, test_nodes, retained, cfg)
            rep.config = cfg.to_json()
            rep.fingerprint = fp
            reports[arm] = rep
        with _stage(f"pca-{arm}"):
            pcas[arm] = pca2(embeddings[arm].values[evaluated])
    return PipelineResult(
        config=cfg,
        kg=kg,
        train_nodes=train_nodes,
        test_nodes=test_nodes,
        retained=retained,
        centrality=cent,
        embeddings=embeddings,
        reports=reports,
        pca={"nodes": evaluated, **pcas},
        warnings=warns,
    )


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------


def fmt(x: float) -> str:
    return repr(float(x))


def centrality_csv(cent: cen.CentralityVector, node_ids) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", *cent.components])
    for nid, row in zip(node_ids, cent.values):
        w.writerow([nid, *(fmt(v) for v in row)])
    return buf.getvalue()


def pca_csv(pca, nodes, kg) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node_id", "x", "y", "class"])
    for v, (x, y) in zip(nodes, pca.projection):
        w.writerow([kg.node_ids[v], fmt(x), fmt(y), kg.classes[kg.labels[v]]])
    return buf.getvalue()


def signed_json(doc: dict, cfg_doc: dict) -> str:
    """Serialize ``doc`` with the config, its fingerprint and a digest of the payload."""
    payload = {**doc, "config": cfg_doc, "fingerprint": fingerprint_of(cfg_doc)}
    payload["digest"] = content_digest(canonical_json(payload))
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_document(res: PipelineResult) -> dict:
    return {
        "kind": "biview-report",
        "arms": {k: _strip(r.to_json()) for k, r in res.reports.items()},
        "comparison": res.comparison(),
        "split": {
            "train": int(res.train_nodes.size),
            "test": int(res.test_nodes.size),
            "retained_classes": [res.kg.classes[c] for c in res.retained],
        },
        "pca_explained_variance_ratio": {
            arm: [float(x) for x in res.pca[arm].explained_variance_ratio] for arm in ARMS
        },
        "untrained_n2v_nodes": int(res.embeddings["node2vec"].untrained.sum()),
        "warnings": list(res.warnings),
    }


def _strip(doc: dict) -> dict:
    # config and fingerprint live once at the top level
    return {k: v for k, v in doc.items() if k not in ("config", "fingerprint")}


def write_outputs(res: PipelineResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_doc = res.config.to_json()
    ids = list(res.kg.node_ids)
    files = {}

    def put(name, text):
        path = out / name
        path.write_text(text, encoding="utf-8")
        files[name] = path

    put("report.json", signed_json(report_document(res), cfg_doc))
    rows = res.comparison()
    put("comparison.csv", to_csv(rows))
    put("comparison.txt", to_text(rows))
    put("centrality.csv", centrality_csv(res.centrality, ids))
    for arm in ARMS:
        put(f"confusion_{arm}.csv", res.reports[arm].confusion_csv())
        put(f"pca_{arm}.csv", pca_csv(res.pca[arm], res.pca["nodes"], res.kg))
        put(f"embedding_{arm}.tsv", format_tsv(res.embeddings[arm], ids, cfg_doc))
    return files


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def verify_file(path) -> tuple[bool, str]:
    """Re-check the config fingerprint and payload digest embedded in an artifact."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        if "fingerprint" not in doc or "config" not in doc:
            return False, "no embedded fingerprint"
        if fingerprint_of(doc["config"]) != doc["fingerprint"]:
            return False, "config fingerprint mismatch"
        digest = doc.pop("digest", None)
        if digest is not None and content_digest(canonical_json(doc)) != digest:
            return False, "payload digest mismatch"
        return True, doc["fingerprint"]
    if path.suffix == ".tsv":
        meta, body = {}, []
        for line in text.splitlines(keepends=True):
            if line.startswith("#"):
                k, _, v = line[1:].rstrip("\n").partition("=")
                meta[k] = v
            else:
                body.append(line)
        if "fingerprint" not in meta or "config" not in meta:
            return False, "no embedded fingerprint"
        if fingerprint_of(json.loads(meta["config"])) != meta["fingerprint"]:
            return False, "config fingerprint mismatch"
        if "digest" in meta and content_digest("".join(body)) != meta["digest"]:
            return False, "payload digest mismatch"
        return True, meta["fingerprint"]
    return False, "unsupported artifact type"
