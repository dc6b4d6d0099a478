"""Classification metrics and the evaluation report."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


def confusion_matrix(truth, pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(truth, dtype=np.int64), np.asarray(pred, dtype=np.int64)), 1)
    return cm


def _safe_div(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out, ~ok


@dataclass
class EvalReport:
    classes: list[str]
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    macro: dict
    micro: dict
    weighted: dict
    # per-class names whose precision/recall/F1 hit a zero denominator
    zero_division: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    fingerprint: str = ""

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def to_json(self) -> dict:
        return {
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "macro": self.macro,
            "micro": self.micro,
            "weighted": self.weighted,
            "per_class": {
                c: {
                    "precision": float(self.precision[i]),
                    "recall": float(self.recall[i]),
                    "f1": float(self.f1[i]),
                    "support": int(self.support[i]),
                }
                for i, c in enumerate(self.classes)
            },
            "confusion": self.confusion.tolist(),
            "zero_division": self.zero_division,
            "config": self.config,
            "fingerprint": self.fingerprint,
        }

    def confusion_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\pred", *self.classes])
        for c, row in zip(self.classes, self.confusion):
            w.writerow([c, *row.tolist()])
        return buf.getvalue()


def report_from_confusion(cm: np.ndarray, classes) -> EvalReport:
    cm = np.asarray(cm, dtype=np.int64)
    tp = np.diag(cm).astype(np.float64)
    pred_pos = cm.sum(axis=0)
    support = cm.sum(axis=1)
    precision, p_zero = _safe_div(tp, pred_pos)
    recall, r_zero = _safe_div(tp, support)
    f1, f_zero = _safe_div(2 * precision * recall, precision + recall)
    total = cm.sum()
    accuracy = float(tp.sum() / total) if total else 0.0
    k = len(classes)
    macro = {
        "precision": float(precision.mean()) if k else 0.0,
        "recall": float(recall.mean()) if k else 0.0,
        "f1": float(f1.mean()) if k else 0.0,
    }
    w = support / total if total else np.zeros(k)
    weighted = {
        "precision": float(np.dot(w, precision)),
        "recall": float(np.dot(w, recall)),
        "f1": float(np.dot(w, f1)),
    }
    # single-label multiclass: micro P = R = F1 = accuracy
    micro = {"precision": accuracy, "recall": accuracy, "f1": accuracy}
    zero = {}
    for name, flags in (("precision", p_zero), ("recall", r_zero), ("f1", f_zero)):
        hit = [str(classes[i]) for i in np.flatnonzero(flags)]
        if hit:
            zero[name] = hit
    return EvalReport(
        classes=[str(c) for c in classes],
        confusion=cm,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        accuracy=accuracy,
        macro=macro,
        micro=micro,
        weighted=weighted,
        zero_division=zero,
    )


def evaluate(predictions, truth, classes) -> EvalReport:
    """One-vs-rest per-class metrics plus macro, micro and support-weighted averages.

    ``predictions`` and ``truth`` are indices into ``classes``.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predictions.shape != truth.shape:
        raise ValueError(f"length mismatch: {predictions.shape[0]} predictions vs {truth.shape[0]} labels")
    return report_from_confusion(confusion_matrix(truth, predictions, len(classes)), classes)


def report_from_json(doc: dict) -> EvalReport:
    rep = report_from_confusion(np.array(doc["confusion"], dtype=np.int64), doc["classes"])
    rep.config = doc.get("config", {})
    rep.fingerprint = doc.get("fingerprint", "")
    return rep
