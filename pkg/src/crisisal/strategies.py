"""Pool-based query strategies: random, LC, PE, BT, GCS and DAL.

Every strategy maps a query context to an ordered batch of unlabeled
document ids. All are deterministic given the context and seed, and all
break score ties by ascending document id so batches are reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import sparse

from . import model as model_mod
from .corpus import Label
from .features import FeatureMatrix

__all__ = [
    "QueryContext",
    "QueryBatch",
    "STRATEGIES",
    "query",
    "query_random",
    "query_least_confidence",
    "query_prediction_entropy",
    "query_breaking_ties",
    "query_greedy_coreset",
    "query_discriminative",
    "binary_entropy",
]

STRATEGIES = ("random", "lc", "pe", "bt", "gcs", "dal")


@dataclass(frozen=True)
class QueryContext:
    """Inputs a strategy may consume; absent ones are None."""

    unlabeled_ids: tuple[str, ...]
    labeled_ids: tuple[str, ...] = ()
    predictions: Mapping[str, float] | None = None
    features: FeatureMatrix | None = None
    batch_size: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.batch_size > len(self.unlabeled_ids):
            raise ValueError(
                f"batch_size {self.batch_size} exceeds unlabeled pool size "
                f"{len(self.unlabeled_ids)}"
            )
        if len(set(self.unlabeled_ids)) != len(self.unlabeled_ids):
            raise ValueError("unlabeled ids must be unique")
        if set(self.unlabeled_ids) & set(self.labeled_ids):
            raise ValueError("unlabeled and labeled ids overlap")


@dataclass(frozen=True)
class QueryBatch:
    """Ordered ids to annotate next, with optional per-id selection scores."""

    ids: tuple[str, ...]
    strategy: str
    scores: Mapping[str, float] | None = None


def _require_predictions(ctx: QueryContext) -> Mapping[str, float]:
    if ctx.predictions is None:
        raise ValueError("this strategy requires predictions")
    missing = [i for i in ctx.unlabeled_ids if i not in ctx.predictions]
    if missing:
        raise ValueError(f"missing predictions for unlabeled ids: {missing[:10]}")
    return ctx.predictions


def _require_features(ctx: QueryContext, ids) -> FeatureMatrix:
    if ctx.features is None:
        raise ValueError("this strategy requires a feature matrix")
    for doc_id in ids:
        ctx.features.index_of(doc_id)  # raises KeyError with the id
    return ctx.features


def _rank(ctx: QueryContext, score_of, strategy: str) -> QueryBatch:
    # Ascending (score, id); callers negate scores that should be maximized.
    ranked = sorted(ctx.unlabeled_ids, key=lambda i: (score_of(i), i))
    chosen = tuple(ranked[: ctx.batch_size])
    return QueryBatch(chosen, strategy, {i: score_of(i) for i in chosen})


def query_random(ctx: QueryContext) -> QueryBatch:
    """Uniform sample without replacement, deterministic under the seed."""
    rng = random.Random(ctx.seed)
    ids = tuple(rng.sample(list(ctx.unlabeled_ids), ctx.batch_size))
    return QueryBatch(ids, "random", None)


def query_least_confidence(ctx: QueryContext) -> QueryBatch:
    """Select the ids whose top-class probability max(p, 1-p) is smallest."""
    p = _require_predictions(ctx)
    return _rank(ctx, lambda i: max(p[i], 1.0 - p[i]), "lc")


def binary_entropy(p: float) -> float:
    """H(p) in nats with the 0*ln(0) = 0 convention."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)


def query_prediction_entropy(ctx: QueryContext) -> QueryBatch:
    """Select the ids with maximal prediction entropy."""
    p = _require_predictions(ctx)
    batch = _rank(ctx, lambda i: -binary_entropy(p[i]), "pe")
    assert batch.scores is not None
    return QueryBatch(batch.ids, "pe", {i: -s for i, s in batch.scores.items()})


def query_breaking_ties(ctx: QueryContext) -> QueryBatch:
    """Select the ids with the smallest margin between the two classes."""
    p = _require_predictions(ctx)
    return _rank(ctx, lambda i: abs(2.0 * p[i] - 1.0), "bt")


def _sq_norms(X) -> np.ndarray:
    if sparse.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return (X * X).sum(axis=1)


def _dist_sq_to_center(X, sqn_X: np.ndarray, center) -> np.ndarray:
    """Squared Euclidean distance from every row of X to one center row."""
    if sparse.issparse(X):
        c = np.asarray(center.toarray()).ravel() if sparse.issparse(center) else np.asarray(center).ravel()
        d2 = sqn_X + float(c @ c) - 2.0 * np.asarray(X @ c).ravel()
        return np.maximum(d2, 0.0)  # guard float cancellation near duplicates
    diff = X - np.asarray(center).ravel()
    return (diff * diff).sum(axis=1)


def query_greedy_coreset(ctx: QueryContext) -> QueryBatch:
    """k-center greedy: repeatedly take the point farthest from all centers.

    Centers start as the labeled pool (or the unlabeled point of lowest id
    when nothing is labeled yet); each step adds the unlabeled point with
    the maximal distance to its nearest center. Distances are Euclidean in
    the feature space, so batches are invariant under uniform scaling.
    """
    feats = _require_features(ctx, (*ctx.unlabeled_ids, *ctx.labeled_ids))
    cand_ids = sorted(ctx.unlabeled_ids)  # ascending id; argmax takes the first max
    X = feats.rows(cand_ids)
    sqn = _sq_norms(X)

    if ctx.labeled_ids:
        min_d2 = np.full(len(cand_ids), np.inf)
        for doc_id in ctx.labeled_ids:
            center = feats.matrix[feats.index_of(doc_id)]
            min_d2 = np.minimum(min_d2, _dist_sq_to_center(X, sqn, center))
    else:
        min_d2 = _dist_sq_to_center(X, sqn, X[0])

    taken = np.zeros(len(cand_ids), dtype=bool)
    chosen: list[str] = []
    scores: dict[str, float] = {}
    for _ in range(ctx.batch_size):
        masked = np.where(taken, -np.inf, min_d2)
        pick = int(np.argmax(masked))
        taken[pick] = True
        chosen.append(cand_ids[pick])
        scores[cand_ids[pick]] = math.sqrt(max(float(min_d2[pick]), 0.0))
        min_d2 = np.minimum(min_d2, _dist_sq_to_center(X, sqn, X[pick]))
    return QueryBatch(tuple(chosen), "gcs", scores)


def query_discriminative(ctx: QueryContext) -> QueryBatch:
    """DAL: train a labeled-vs-unlabeled discriminator, query the most
    unlabeled-looking points."""
    if not ctx.labeled_ids:
        raise ValueError("DAL requires labeled examples")
    feats = _require_features(ctx, (*ctx.unlabeled_ids, *ctx.labeled_ids))
    ids = (*ctx.labeled_ids, *ctx.unlabeled_ids)
    disc_labels = {i: Label.UNRELATED for i in ctx.labeled_ids}
    disc_labels.update({i: Label.RELATED for i in ctx.unlabeled_ids})
    disc = model_mod.train(
        feats.subset(ids), disc_labels, model_mod.Hyperparams(seed=ctx.seed)
    )
    preds = model_mod.predict(disc, feats.subset(ctx.unlabeled_ids))
    p_unlabeled = {p.id: p.p_related for p in preds}
    batch = _rank(ctx, lambda i: -p_unlabeled[i], "dal")
    assert batch.scores is not None
    return QueryBatch(batch.ids, "dal", {i: -s for i, s in batch.scores.items()})


_STRATEGY_FNS = {
    "random": query_random,
    "lc": query_least_confidence,
    "pe": query_prediction_entropy,
    "bt": query_breaking_ties,
    "gcs": query_greedy_coreset,
    "dal": query_discriminative,
}


def query(strategy: str, ctx: QueryContext) -> QueryBatch:
    """Dispatch by strategy token (random|lc|pe|bt|gcs|dal)."""
    try:
        fn = _STRATEGY_FNS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}") from None
    return fn(ctx)
