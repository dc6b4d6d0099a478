"""Command-line entry point: ``biview <subcommand>``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import kg as kgmod
from .config import RunConfig, config_from_json, load_config, synthetic_spec_from_json
from .embedding import read_tsv, write_tsv
from .evalkit import compare_models, report_from_json, split, to_csv, to_text
from .evalkit.split import SplitError
from .fingerprint import canonical_json
from .pipeline import (
    StageError,
    centrality_csv,
    classify,
    compute_centrality,
    compute_fusion,
    compute_node2vec,
    compute_sage,
    run_pipeline,
    signed_json,
    verify_file,
    write_outputs,
)
from .synth import SyntheticSpec, generate_synthetic

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2

log = logging.getLogger("biview")


class NonConvergence(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# config assembly: file values first, then explicit flags
# ---------------------------------------------------------------------------


def _base_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    top = {}
    if getattr(args, "seed", None) is not None:
        top["seed"] = args.seed
    if getattr(args, "directed", False):
        top["direction"] = kgmod.DIRECTED
    if getattr(args, "paper_faithful", None) is not None:
        top["paper_faithful"] = args.paper_faithful
    sections: dict[str, dict] = {}
    for dest, (section, key) in _FLAG_MAP.items():
        val = getattr(args, dest, None)
        if val is not None:
            sections.setdefault(section, {})[key] = val
    return config_from_json({**top, **sections}, base=cfg)


_FLAG_MAP = {
    "dim": ("node2vec", "dim"),
    "walk_length": ("node2vec", "walk_length"),
    "walks_per_node": ("node2vec", "walks_per_node"),
    "p": ("node2vec", "p"),
    "q": ("node2vec", "q"),
    "window": ("node2vec", "window"),
    "negatives": ("node2vec", "negatives"),
    "n2v_epochs": ("node2vec", "epochs"),
    "sage_dim": ("sage", "dims"),
    "sage_epochs": ("sage", "epochs"),
    "sage_lr": ("sage", "lr"),
    "fusion": ("fusion", "variant"),
    "hidden": ("fusion", "hidden"),
    "out_dim": ("fusion", "out_dim"),
    "fusion_epochs": ("fusion", "epochs"),
    "fusion_lr": ("fusion", "lr"),
    "train_fraction": ("split", "train_fraction"),
    "min_samples": ("split", "min_samples"),
    "max_depth": ("tree", "max_depth"),
}


def _add_common(p, split_opts=True):
    p.add_argument("--config", help="JSON run config; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--directed", action="store_true", default=None, help="keep edge direction")
    p.add_argument("--threads", type=int, default=1, help="worker cap (computation is single-threaded)")
    p.add_argument("--strict", action="store_true", help="exit 2 on numerical non-convergence")
    if split_opts:
        p.add_argument("--train-fraction", type=float)
        p.add_argument("--min-samples", type=int, help="drop classes with fewer labeled nodes")


def _add_n2v(p):
    p.add_argument("--dim", type=int)
    p.add_argument("--walk-length", type=int)
    p.add_argument("--walks-per-node", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", dest="n2v_epochs", type=int)


def _add_mask(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mask-test-labels", dest="paper_faithful", action="store_false", default=None)
    g.add_argument(
        "--paper-faithful", dest="paper_faithful", action="store_true", help="feed every node's label to GraphSAGE"
    )


def _load_graph(path) -> kgmod.KnowledgeGraph:
    return kgmod.load(path)


def _load_view(path, kg):
    emb, _, _ = read_tsv(path, kg.node_ids)
    return emb


def _split(kg, cfg):
    return split(kg.labels, cfg.split_spec())


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args):
    g = kgmod.ingest(args.edges, args.labels)
    kgmod.save(g, args.out)
    counts = {g.classes[c]: n for c, n in kgmod.class_counts(g).items()}
    print(f"nodes={g.n_nodes} edges={g.n_edges} classes={json.dumps(counts, sort_keys=True)}")


def cmd_synth(args):
    doc = {}
    if args.spec:
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    if args.blocks is not None or args.block_size is not None:
        blocks = args.blocks if args.blocks is not None else len(doc.get("sizes", SyntheticSpec().sizes))
        size = args.block_size if args.block_size is not None else 200
        doc["sizes"] = [size] * blocks
    for key in ("p_in", "p_out", "informative", "seed"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    spec = synthetic_spec_from_json(doc)
    g = generate_synthetic(spec)
    kgmod.save(g, args.out)
    if args.csv_dir:
        out = Path(args.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "edges.csv").open("w", encoding="utf-8") as fh:
            fh.write("src,rel,dst,weight\n")
            for s, r, d, w in zip(g.src, g.rel, g.dst, g.weight):
                fh.write(f"{g.node_ids[s]},{g.relations[r]},{g.node_ids[d]},{float(w)!r}\n")
        with (out / "labels.csv").open("w", encoding="utf-8") as fh:
            fh.write("node,class\n")
            for v in g.labeled_nodes():
                fh.write(f"{g.node_ids[v]},{g.classes[g.labels[v]]}\n")
    print(f"nodes={g.n_nodes} edges={g.n_edges}")


def cmd_centrality(args):
    cfg = _base_config(args)
    if args.no_normalize:
        cfg = config_from_json({"centrality": {"normalize": False}}, base=cfg)
    g = _load_graph(args.graph)
    cent = compute_centrality(g, cfg)
    Path(args.out).write_text(centrality_csv(cent, list(g.node_ids)), encoding="utf-8")
    if not cent.converged:
        _nonconverged(args, "pagerank did not converge")


def cmd_embed_n2v(args):
    cfg = _base_config(args)
    g = _load_graph(args.graph)
    emb = compute_node2vec(g, cfg)
    if emb.untrained.any():
        log.warning("%d node(s) have no walks; their rows are untrained", int(emb.untrained.sum()))
    write_tsv(args.out, emb, list(g.node_ids), cfg.to_json())


def cmd_embed_sage(args):
    cfg = _base_config(args)
    if args.layers is not None or args.sage_dim_flag is not None:
        layers = args.layers if args.layers is not None else len(cfg.sage.dims)
        dim = args.sage_dim_flag if args.sage_dim_flag is not None else cfg.sage.dims[-1]
        cfg = config_from_json({"sage": {"dims": [dim] * layers}}, base=cfg)
    g = _load_graph(args.graph)
    n2v = _load_view(args.n2v, g)
    cent = compute_centrality(g, cfg)
    train, test = _split(g, cfg)
    res = compute_sage(g, n2v, cent, train, test, cfg)
    write_tsv(args.out, res.embedding, list(g.node_ids), cfg.to_json())
    if not cent.converged:
        _nonconverged(args, "pagerank did not converge")


def cmd_fuse(args):
    cfg = _base_config(args)
    g = _load_graph(args.graph)
    n2v = _load_view(args.n2v, g)
    sage = _load_view(args.sage, g)
    train, _ = _split(g, cfg)
    emb = compute_fusion(g, n2v, sage, train, cfg)
    write_tsv(args.out, emb, list(g.node_ids), cfg.to_json())


def cmd_classify(args):
    cfg = _base_config(args)
    g = _load_graph(args.graph)
    emb = _load_view(args.embedding, g)
    train, test = _split(g, cfg)
    retained = np.unique(g.labels[np.concatenate([train, test])])
    rep, _ = classify(emb, g, train, test, retained, cfg)
    doc = rep.to_json()
    doc.pop("config")
    doc.pop("fingerprint")
    doc["kind"] = "biview-classification"
    Path(args.out).write_text(signed_json(doc, cfg.to_json()), encoding="utf-8")
    if args.confusion:
        Path(args.confusion).write_text(rep.confusion_csv(), encoding="utf-8")
    print(f"accuracy={rep.accuracy:.4f} macro_f1={rep.macro['f1']:.4f}")


def cmd_report(args):
    names = args.names or [Path(p).stem for p in args.reports]
    if len(names) != len(args.reports):
        raise ValueError("--names must match the number of reports")
    reps = {}
    for name, path in zip(names, args.reports):
        reps[name] = report_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    rows = compare_models(reps)
    if args.csv:
        Path(args.csv).write_text(to_csv(rows), encoding="utf-8")
    sys.stdout.write(to_text(rows))


def cmd_run(args):
    cfg = _base_config(args)
    if args.graph:
        g = _load_graph(args.graph)
        source = {"graph": str(args.graph)}
    elif args.edges:
        if not args.labels:
            raise ValueError("--edges requires --labels")
        g = kgmod.ingest(args.edges, args.labels)
        source = {"edges": str(args.edges), "labels": str(args.labels)}
    else:
        doc = json.loads(Path(args.synth).read_text(encoding="utf-8")) if args.synth else {}
        spec = synthetic_spec_from_json(doc) if doc else SyntheticSpec(seed=cfg.stage_seed("synth"))
        g = generate_synthetic(spec)
        source = {"synthetic": json.loads(canonical_json(dataclasses.asdict(spec)))}
    cfg = dataclasses.replace(cfg, inputs=source)
    res = run_pipeline(g, cfg)
    write_outputs(res, args.out)
    sys.stdout.write(to_text(res.comparison()))
    for w in res.warnings:
        _nonconverged(args, w)


def cmd_verify(args):
    bad = 0
    paths = []
    for p in args.paths:
        p = Path(p)
        paths.extend(sorted(x for x in p.iterdir() if x.suffix in (".json", ".tsv")) if p.is_dir() else [p])
    for p in paths:
        ok, msg = verify_file(p)
        print(f"{'OK  ' if ok else 'FAIL'} {p} {msg}")
        bad += not ok
    if bad:
        raise ValueError(f"{bad} artifact(s) failed verification")


def _nonconverged(args, msg):
    log.warning(msg)
    if getattr(args, "strict", False):
        raise NonConvergence(msg)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biview", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="CSV edges + labels -> graph JSON")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a stochastic-block-model graph")
    p.add_argument("--spec", help="JSON SyntheticSpec")
    p.add_argument("--blocks", type=int)
    p.add_argument("--block-size", type=int)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--informative", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-dir", help="also write edges.csv / labels.csv here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("centrality", help="per-node degree / PageRank / betweenness CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-normalize", action="store_true")
    _add_common(p, split_opts=False)
    _add_mask(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("embed-n2v", help="node2vec embedding TSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_n2v(p)
    _add_common(p, split_opts=False)
    p.set_defaults(func=cmd_embed_n2v)

    p = sub.add_parser("embed-sage", help="GraphSAGE embedding TSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--n2v", required=True, help="node2vec TSV")
    p.add_argument("--out", required=True)
    p.add_argument("--dim", dest="sage_dim_flag", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--epochs", dest="sage_epochs", type=int)
    p.add_argument("--lr", dest="sage_lr", type=float)
    _add_mask(p)
    _add_common(p)
    p.set_defaults(func=cmd_embed_sage)

    p = sub.add_parser("fuse", help="fuse node2vec and GraphSAGE TSVs")
    p.add_argument("--graph", required=True)
    p.add_argument("--n2v", required=True)
    p.add_argument("--sage", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fusion", choices=("fusionnet", "gated"))
    p.add_argument("--hidden", type=int)
    p.add_argument("--out-dim", type=int)
    p.add_argument("--epochs", dest="fusion_epochs", type=int)
    p.add_argument("--lr", dest="fusion_lr", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("classify", help="decision-tree evaluation of one embedding")
    p.add_argument("--graph", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--confusion", help="confusion matrix CSV")
    p.add_argument("--max-depth", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="comparison table from classification reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--names", nargs="+")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="full three-arm pipeline")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph")
    src.add_argument("--edges")
    src.add_argument("--synth", help="JSON SyntheticSpec (default: 4x200 SBM)")
    p.add_argument("--labels")
    p.add_argument("--out", required=True)
    p.add_argument("--fusion", choices=("fusionnet", "gated"))
    _add_mask(p)
    _add_n2v(p)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="re-check fingerprints of emitted artifacts")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (StageError, kgmod.GraphInputError, SplitError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
