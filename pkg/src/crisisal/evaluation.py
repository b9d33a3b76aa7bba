"""Per-class precision/recall/F1, accuracy, confusion matrices and the
multi-method comparison table.

The comparison renderer mirrors the usual two-class layout for this task:
one column per method, metric rows showing "unrelated / related" value
pairs and a single accuracy row. Zero-denominator metrics come out as 0
and are listed in the report's degenerate set so tables always render.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Label

__all__ = [
    "ConfusionMatrix",
    "EvaluationReport",
    "evaluate",
    "compare",
    "render_comparison_text",
    "comparison_to_csv",
    "report_to_dict",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with "related" as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self) -> "ConfusionMatrix":
        """The same matrix with the positive-class convention flipped."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


@dataclass(frozen=True)
class EvaluationReport:
    """Per-class metrics plus accuracy; degenerate metrics are 0 and flagged."""

    method_tag: str
    matrix: ConfusionMatrix
    accuracy: float
    precision_unrelated: float
    precision_related: float
    recall_unrelated: float
    recall_related: float
    f1_unrelated: float
    f1_related: float
    degenerate_metrics: tuple[str, ...] = ()


def _ratio(numer: int, denom: int, name: str, degenerate: list[str]) -> float:
    if denom == 0:
        degenerate.append(name)
        return 0.0
    return numer / denom


def _f1(precision: float, recall: float, name: str, degenerate: list[str]) -> float:
    if precision + recall == 0.0:
        degenerate.append(name)
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def report_from_matrix(matrix: ConfusionMatrix, method_tag: str = "") -> EvaluationReport:
    """Compute the full report from confusion counts alone."""
    if matrix.total == 0:
        raise ValueError("cannot evaluate an empty gold set")
    degenerate: list[str] = []
    swapped = matrix.swapped()
    precision_related = _ratio(matrix.tp, matrix.tp + matrix.fp, "precision_related", degenerate)
    recall_related = _ratio(matrix.tp, matrix.tp + matrix.fn, "recall_related", degenerate)
    precision_unrelated = _ratio(swapped.tp, swapped.tp + swapped.fp, "precision_unrelated", degenerate)
    recall_unrelated = _ratio(swapped.tp, swapped.tp + swapped.fn, "recall_unrelated", degenerate)
    return EvaluationReport(
        method_tag=method_tag,
        matrix=matrix,
        accuracy=(matrix.tp + matrix.tn) / matrix.total,
        precision_unrelated=precision_unrelated,
        precision_related=precision_related,
        recall_unrelated=recall_unrelated,
        recall_related=recall_related,
        f1_unrelated=_f1(precision_unrelated, recall_unrelated, "f1_unrelated", degenerate),
        f1_related=_f1(precision_related, recall_related, "f1_related", degenerate),
        degenerate_metrics=tuple(degenerate),
    )


def evaluate(
    predictions: Mapping[str, Label],
    gold: Mapping[str, Label],
    method_tag: str = "",
) -> EvaluationReport:
    """Score predictions against gold labels (predictions may cover more ids)."""
    if not gold:
        raise ValueError("gold labels must be nonempty")
    missing = [i for i in gold if i not in predictions]
    if missing:
        raise ValueError(f"missing predictions for gold ids: {missing[:10]}")
    tp = fp = fn = tn = 0
    for doc_id, gold_label in gold.items():
        predicted = predictions[doc_id]
        if gold_label == Label.RELATED:
            if predicted == Label.RELATED:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == Label.RELATED:
                fp += 1
            else:
                tn += 1
    return report_from_matrix(ConfusionMatrix(tp, fp, fn, tn), method_tag)


def compare(
    methods: Sequence[tuple[str, Mapping[str, Label]]],
    gold: Mapping[str, Label],
) -> list[EvaluationReport]:
    """One report per (tag, prediction map), in input order."""
    if not methods:
        raise ValueError("need at least one method to compare")
    return [evaluate(preds, gold, method_tag=tag) for tag, preds in methods]


def _pair(a: float, b: float, bold_a: bool, bold_b: bool) -> str:
    left = f"**{a:.2f}**" if bold_a else f"{a:.2f}"
    right = f"**{b:.2f}**" if bold_b else f"{b:.2f}"
    return f"{left} / {right}"


_METRIC_ROWS = (
    ("Precision", "precision_unrelated", "precision_related"),
    ("Recall", "recall_unrelated", "recall_related"),
    ("F1 score", "f1_unrelated", "f1_related"),
)


def render_comparison_text(reports: Sequence[EvaluationReport], bold_best: bool = False) -> str:
    """Plain-text comparison table: metric rows, one column per method."""
    if not reports:
        raise ValueError("nothing to render")
    headers = [r.method_tag or f"method{i}" for i, r in enumerate(reports)]
    rows: list[list[str]] = []
    for row_name, attr0, attr1 in _METRIC_ROWS:
        values0 = [getattr(r, attr0) for r in reports]
        values1 = [getattr(r, attr1) for r in reports]
        best0, best1 = max(values0), max(values1)
        cells = [
            _pair(v0, v1, bold_best and v0 == best0, bold_best and v1 == best1)
            for v0, v1 in zip(values0, values1)
        ]
        rows.append([row_name, *cells])
    accuracies = [r.accuracy for r in reports]
    best_acc = max(accuracies)
    rows.append(
        [
            "Accuracy",
            *(
                f"**{a:.2f}**" if bold_best and a == best_acc else f"{a:.2f}"
                for a in accuracies
            ),
        ]
    )

    table = [["", *headers], *rows]
    widths = [max(len(row[col]) for row in table) for col in range(len(table[0]))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"


_CSV_FIELDS = (
    "method",
    "precision_unrelated",
    "precision_related",
    "recall_unrelated",
    "recall_related",
    "f1_unrelated",
    "f1_related",
    "accuracy",
    "tp",
    "fp",
    "fn",
    "tn",
    "degenerate_metrics",
)


def comparison_to_csv(reports: Sequence[EvaluationReport]) -> str:
    """Full-precision CSV, one row per method."""
    lines = [",".join(_CSV_FIELDS)]
    for r in reports:
        lines.append(
            ",".join(
                [
                    r.method_tag,
                    repr(r.precision_unrelated),
                    repr(r.precision_related),
                    repr(r.recall_unrelated),
                    repr(r.recall_related),
                    repr(r.f1_unrelated),
                    repr(r.f1_related),
                    repr(r.accuracy),
                    str(r.matrix.tp),
                    str(r.matrix.fp),
                    str(r.matrix.fn),
                    str(r.matrix.tn),
                    ";".join(r.degenerate_metrics),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvaluationReport) -> dict:
    """JSON-ready report shape; this is what the UI's metrics view consumes."""
    return {
        "method_tag": report.method_tag,
        "accuracy": report.accuracy,
        "per_class": {
            "unrelated": {
                "precision": report.precision_unrelated,
                "recall": report.recall_unrelated,
                "f1": report.f1_unrelated,
            },
            "related": {
                "precision": report.precision_related,
                "recall": report.recall_related,
                "f1": report.f1_related,
            },
        },
        "confusion": {
            "tp": report.matrix.tp,
            "fp": report.matrix.fp,
            "fn": report.matrix.fn,
            "tn": report.matrix.tn,
        },
        "degenerate_metrics": list(report.degenerate_metrics),
    }


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
