from .compare import compare_models, to_csv, to_text
from .metrics import EvalReport, confusion_matrix, evaluate, report_from_confusion, report_from_json
from .pca import PcaResult, pca2
from .split import SplitError, SplitSpec, retained_classes, split
from .tree import DecisionTree, best_split, fit_tree, gini

__all__ = [
    "DecisionTree",
    "EvalReport",
    "PcaResult",
    "SplitError",
    "SplitSpec",
    "best_split",
    "compare_models",
    "confusion_matrix",
    "evaluate",
    "fit_tree",
    "gini",
    "pca2",
    "report_from_confusion",
    "report_from_json",
    "retained_classes",
    "split",
    "to_csv",
    "to_text",
]
