"""Side-by-side comparison table of evaluation reports."""

from __future__ import annotations

import csv
import io

from .metrics import EvalReport

COLUMNS = ("accuracy", "macro_precision", "macro_recall", "macro_f1")


def compare_models(reports: dict[str, EvalReport]) -> list[dict]:
    """One row per method with accuracy and macro-averaged P/R/F1."""
    if not reports:
        return []
    class_sets = {name: tuple(r.classes) for name, r in reports.items()}
    first = next(iter(class_sets.values()))
    if not set(first) or any(set(cs) != set(first) for cs in class_sets.values()):
        common = set.intersection(*(set(cs) for cs in class_sets.values()))
        raise ValueError(f"reports do not share a class set (common classes: {sorted(common)})")
    rows = []
    for name, r in reports.items():
        rows.append(
            {
                "method": name,
                "accuracy": r.accuracy,
                "macro_precision": r.macro["precision"],
                "macro_recall": r.macro["recall"],
                "macro_f1": r.macro["f1"],
            }
        )
    return rows


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", *COLUMNS])
    for r in rows:
        w.writerow([r["method"], *(f"{r[c]:.6f}" for c in COLUMNS)])
    return buf.getvalue()


def to_text(rows: list[dict]) -> str:
    width = max([len("method")] + [len(r["method"]) for r in rows])
    head = "method".ljust(width) + "".join(c.rjust(17) for c in COLUMNS)
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(r["method"].ljust(width) + "".join(f"{r[c]:17.4f}" for c in COLUMNS))
    return "\n".join(lines) + "\n"
