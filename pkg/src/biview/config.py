"""Run configuration, seed fan-out and config fingerprints."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .evalkit.split import SplitSpec
from .fingerprint import fingerprint_of
from .fusion import FusionHyper
from .sage import SageHyper
from .sgns import SgnsConfig
from .synth import SyntheticSpec
from .walks import WalkConfig

SCHEMA_VERSION = 1
STAGES = ("split", "walks", "sgns", "sage", "fusion", "synth")


def derive_seed(global_seed: int, stage: str) -> int:
    """Stage seed from a hash of ``(global_seed, stage)``; fits in 31 bits."""
    digest = hashlib.sha256(f"{int(global_seed)}/{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = 12
    min_samples_leaf: int = 2


@dataclass(frozen=True)
class Node2VecParams:
    dim: int = 64
    walk_length: int = 80
    walks_per_node: int = 10
    p: float = 1.0
    q: float = 1.0
    window: int = 10
    negatives: int = 5
    epochs: int = 1
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    shrink_window: bool = True


@dataclass(frozen=True)
class SageParams:
    dims: tuple[int, ...] = (64, 64)
    epochs: int = 50
    lr: float = 0.01
    sample_sizes: tuple[int | None, ...] | None = None
    normalize: bool = True


@dataclass(frozen=True)
class FusionParams:
    variant: str = "fusionnet"
    hidden: int = 128
    out_dim: int = 64
    epochs: int = 100
    lr: float = 0.01
    batch_size: int | None = None
    early_stopping: bool = False


@dataclass(frozen=True)
class SplitParams:
    train_fraction: float = 0.8
    stratified: bool = True
    min_samples: int = 200


@dataclass(frozen=True)
class CentralityParams:
    components: tuple[str, ...] = ("degree", "pagerank", "betweenness")
    normalize: bool = True
    normalize_betweenness: bool = True
    damping: float = 0.85
    tol: float = 1e-8
    max_iter: int = 100


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    direction: str = "undirected"
    paper_faithful: bool = False
    node2vec: Node2VecParams = field(default_factory=Node2VecParams)
    centrality: CentralityParams = field(default_factory=CentralityParams)
    sage: SageParams = field(default_factory=SageParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    split: SplitParams = field(default_factory=SplitParams)
    tree: TreeParams = field(default_factory=TreeParams)
    # explicit per-stage seed overrides; missing stages derive from ``seed``
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    def stage_seed(self, stage: str) -> int:
        if stage not in STAGES:
            raise KeyError(stage)
        if stage in self.seeds and self.seeds[stage] is not None:
            return int(self.seeds[stage])
        return derive_seed(self.seed, stage)

    def effective_centrality(self) -> CentralityParams:
        if self.paper_faithful:
            return dataclasses.replace(self.centrality, components=("pagerank", "betweenness"))
        return self.centrality

    def walk_config(self) -> WalkConfig:
        n = self.node2vec
        return WalkConfig(n.p, n.q, n.walk_length, n.walks_per_node, self.stage_seed("walks"))

    def sgns_config(self) -> SgnsConfig:
        n = self.node2vec
        return SgnsConfig(
            n.window, n.negatives, n.epochs, n.learning_rate, n.min_learning_rate, n.shrink_window,
            self.stage_seed("sgns"),
        )

    def sage_hyper(self) -> SageHyper:
        s = self.sage
        return SageHyper(tuple(s.dims), s.epochs, s.lr, "adam", s.sample_sizes, s.normalize, self.stage_seed("sage"))

    def fusion_hyper(self) -> FusionHyper:
        f = self.fusion
        return FusionHyper(
            f.hidden, f.out_dim, f.epochs, f.lr, "adam", f.batch_size, f.early_stopping, 10, self.stage_seed("fusion")
        )

    def split_spec(self) -> SplitSpec:
        s = self.split
        return SplitSpec(s.train_fraction, s.stratified, self.stage_seed("split"), s.min_samples)

    def to_json(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["schema"] = SCHEMA_VERSION
        return _jsonable(doc)

    def fingerprint(self) -> str:
        return fingerprint_of(self.to_json())


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


_SECTIONS = {
    "node2vec": Node2VecParams,
    "centrality": CentralityParams,
    "sage": SageParams,
    "fusion": FusionParams,
    "split": SplitParams,
    "tree": TreeParams,
}

_TUPLE_FIELDS = {"dims", "sample_sizes", "components"}


def _build(cls, doc: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kw = {k: (tuple(v) if k in _TUPLE_FIELDS and v is not None else v) for k, v in doc.items()}
    return cls(**kw)


def config_from_json(doc: dict, base: RunConfig | None = None) -> RunConfig:
    """Merge a (possibly partial) config document over ``base``."""
    base = base or RunConfig()
    doc = dict(doc)
    schema = doc.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema {schema!r}")
    kw = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            merged = {**dataclasses.asdict(getattr(base, key)), **value}
            kw[key] = _build(_SECTIONS[key], merged)
        elif key in ("seed", "direction", "paper_faithful", "seeds", "inputs"):
            kw[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    return dataclasses.replace(base, **kw)


def load_config(path) -> RunConfig:
    return config_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def synthetic_spec_from_json(doc: dict) -> SyntheticSpec:
    doc = dict(doc)
    if "sizes" in doc:
        doc["sizes"] = tuple(doc["sizes"])
    return SyntheticSpec(**doc)
