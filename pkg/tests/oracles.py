"""Independent oracles used by the unit and acceptance tests.

These deliberately re-derive results along a different path than the
package implementations: the edit-distance oracle is the memoized
recursion on prefix lengths, the core-set oracle recomputes every distance
from scratch each step, and the metrics oracle applies the textbook
fractions directly.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def edit_distance_recursive(x: str, y: str) -> int:
    """Memoized recursion on prefix lengths ed(x[1..i], y[1..j])."""

    @lru_cache(maxsize=None)
    def ed(i: int, j: int) -> int:
        if i == 0 and j == 0:
            return 0
        if j == 0:
            return i
        if i == 0:
            return j
        return min(
            ed(i - 1, j) + 1,
            ed(i, j - 1) + 1,
            ed(i - 1, j - 1) + (1 if x[i - 1] != y[j - 1] else 0),
        )

    result = ed(len(x), len(y))
    ed.cache_clear()
    return result


def greedy_coreset_oracle(
    points: dict[str, np.ndarray],
    labeled_ids: list[str],
    unlabeled_ids: list[str],
    batch_size: int,
) -> list[str]:
    """Brute-force k-center greedy: full distance recomputation per step.

    Ties break toward the lowest id; squared Euclidean distances (monotone
    in the true distance, so the greedy choices are identical).
    """
    if labeled_ids:
        centers = [points[i] for i in labeled_ids]
    else:
        centers = [points[min(unlabeled_ids)]]
    chosen: list[str] = []
    for _ in range(batch_size):
        best_id = None
        best_d = -1.0
        for doc_id in sorted(unlabeled_ids):
            if doc_id in chosen:
                continue
            d = min(float(np.sum((points[doc_id] - c) ** 2)) for c in centers)
            if d > best_d:
                best_id, best_d = doc_id, d
        assert best_id is not None
        chosen.append(best_id)
        centers.append(points[best_id])
    return chosen


def metrics_oracle(tp: int, fp: int, fn: int, tn: int) -> dict:
    """Textbook per-class fractions with the zero-denominator -> 0 rule."""

    def frac(a: int, b: int) -> float:
        return a / b if b else 0.0

    precision_related = frac(tp, tp + fp)
    recall_related = frac(tp, tp + fn)
    precision_unrelated = frac(tn, tn + fn)
    recall_unrelated = frac(tn, tn + fp)

    def f1(p: float, r: float) -> float:
        return 2 * p * r / (p + r) if p + r else 0.0

    degenerate = []
    if tp + fp == 0:
        degenerate.append("precision_related")
    if tp + fn == 0:
        degenerate.append("recall_related")
    if tn + fn == 0:
        degenerate.append("precision_unrelated")
    if tn + fp == 0:
        degenerate.append("recall_unrelated")
    if precision_unrelated + recall_unrelated == 0:
        degenerate.append("f1_unrelated")
    if precision_related + recall_related == 0:
        degenerate.append("f1_related")

    return {
        "accuracy": frac(tp + tn, tp + fp + fn + tn),
        "precision_related": precision_related,
        "recall_related": recall_related,
        "precision_unrelated": precision_unrelated,
        "recall_unrelated": recall_unrelated,
        "f1_related": f1(precision_related, recall_related),
        "f1_unrelated": f1(precision_unrelated, recall_unrelated),
        "degenerate": set(degenerate),
    }
