"""Two-view node embeddings for knowledge-graph node classification.

Node2vec walk embeddings and centrality features feed a supervised
GraphSAGE model; the two views are then fused and evaluated with a
decision-tree classifier against each single view.
"""

from .config import RunConfig, derive_seed
from .embedding import EmbeddingMatrix, read_tsv, write_tsv
from .kg import AdjacencyView, GraphInputError, KnowledgeGraph, build_adjacency, class_counts, ingest
from .pipeline import run_pipeline, write_outputs
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AdjacencyView",
    "EmbeddingMatrix",
    "GraphInputError",
    "KnowledgeGraph",
    "RunConfig",
    "SyntheticSpec",
    "build_adjacency",
    "class_counts",
    "derive_seed",
    "generate_synthetic",
    "ingest",
    "read_tsv",
    "run_pipeline",
    "write_outputs",
    "write_tsv",
]
