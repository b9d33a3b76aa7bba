"""The active-learning session state machine: seed, query, annotate, update,
evaluate, repeat; with full checkpoint/resume persistence.

A session is a sequence of immutable states. The seed batch is always drawn
randomly (no model exists yet); each later batch comes from the configured
strategy. The model is retrained from scratch every round so metric curves
are reproducible, and all per-round randomness is derived statelessly from
(session seed, round), which makes resumption exact.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import evaluation, features as features_mod, model as model_mod, strategies
from .corpus import Label, Pool, ingest, pool_to_jsonl, subsample_unlabeled
from .features import FeatureMatrix
from .model import Hyperparams, LinearModel
from .strategies import QueryBatch, QueryContext

__all__ = [
    "SessionConfig",
    "SessionState",
    "RoundMetrics",
    "RoundRecord",
    "EngineError",
    "start_session",
    "submit_labels",
    "checkpoint",
    "resume",
    "run_simulated",
    "metrics_to_csv",
    "CHECKPOINT_FORMAT",
]

CHECKPOINT_FORMAT = "al-checkpoint-v1"

PHASE_AWAITING = "awaiting_labels"
PHASE_READY = "ready_to_query"
PHASE_FINISHED = "finished"


class EngineError(RuntimeError):
    """A session transition or persistence contract was violated."""


@dataclass(frozen=True)
class SessionConfig:
    """Protocol settings; the defaults are the canonical 10 x 20 + 20 setup."""

    rounds: int = 10
    batch_size: int = 20
    seed_batch_size: int = 20
    strategy: str = "gcs"
    seed: int = 0
    feature_source: str = "tfidf"
    embeddings_path: str | None = None
    max_features: int = 5000
    min_df: int = 1
    hyperparams: Hyperparams = Hyperparams()
    pool_subsample: int | None = None

    def __post_init__(self) -> None:
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.batch_size < 1 or self.seed_batch_size < 1:
            raise ValueError("batch sizes must be >= 1")
        if self.strategy not in strategies.STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.feature_source not in ("tfidf", "external"):
            raise ValueError(f"unknown feature source {self.feature_source!r}")
        if self.max_features < 1 or self.min_df < 1:
            raise ValueError("max_features and min_df must be >= 1")
        if self.pool_subsample is not None and self.pool_subsample < 1:
            raise ValueError("pool_subsample must be >= 1")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "batch_size": self.batch_size,
            "seed_batch_size": self.seed_batch_size,
            "strategy": self.strategy,
            "seed": self.seed,
            "feature_source": self.feature_source,
            "embeddings_path": self.embeddings_path,
            "max_features": self.max_features,
            "min_df": self.min_df,
            "hyperparams": self.hyperparams.to_dict(),
            "pool_subsample": self.pool_subsample,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "SessionConfig":
        data = dict(payload)
        hp = data.pop("hyperparams", None)
        if hp is not None:
            data["hyperparams"] = Hyperparams(**hp)
        return cls(**data)


@dataclass(frozen=True)
class RoundMetrics:
    """Held-out test metrics recorded after one labelling round."""

    round: int
    accuracy: float
    f1_related: float
    f1_unrelated: float
    labeled_count: int

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "accuracy": self.accuracy,
            "f1_related": self.f1_related,
            "f1_unrelated": self.f1_unrelated,
            "labeled_count": self.labeled_count,
        }


@dataclass(frozen=True)
class RoundRecord:
    """Everything one round contributed: queries, labels, metrics, model."""

    round: int
    queried_ids: tuple[str, ...]
    labels: Mapping[str, Label]
    metrics: RoundMetrics
    model_ref: str


@dataclass(frozen=True)
class SessionState:
    """One immutable snapshot of an AL session.

    ``features`` and ``model`` are derived data: they are rebuilt on resume
    rather than persisted (features deterministically from the pool, the
    model from its snapshot).
    """

    config: SessionConfig
    pool: Pool
    round: int
    phase: str
    pending_batch: QueryBatch | None
    history: tuple[RoundRecord, ...]
    model_snapshots: Mapping[str, dict]
    features: FeatureMatrix = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
    model: LinearModel | None = field(repr=False, compare=False, default=None)
    base_pool_jsonl: str = field(repr=False, compare=False, default="")
    checkpoint_path: Path | None = field(compare=False, default=None)

    def __post_init__(self) -> None:
        if self.phase not in (PHASE_AWAITING, PHASE_READY, PHASE_FINISHED):
            raise ValueError(f"unknown phase {self.phase!r}")
        if (self.phase == PHASE_AWAITING) != (self.pending_batch is not None):
            raise ValueError("phase=awaiting_labels iff a pending batch exists")
        if self.round > self.config.rounds:
            raise ValueError("round exceeds configured rounds")
        expected = self.config.rounds + 1 if self.phase == PHASE_FINISHED else self.round
        if len(self.history) != expected:
            raise ValueError(
                f"history length {len(self.history)} inconsistent with "
                f"round {self.round} and phase {self.phase}"
            )

    @property
    def metrics_history(self) -> list[RoundMetrics]:
        return [record.metrics for record in self.history]


def _round_seed(seed: int, round_index: int) -> int:
    """Stateless per-round seed; resumption cannot disturb the stream."""
    digest = hashlib.sha256(f"{seed}:{round_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _build_features(pool: Pool, config: SessionConfig) -> FeatureMatrix:
    docs = list(pool.iter_documents())
    if config.feature_source == "tfidf":
        vocab = features_mod.fit_vocabulary(
            docs, min_df=config.min_df, max_features=config.max_features
        )
        return features_mod.transform_tfidf(docs, vocab)
    if not config.embeddings_path:
        raise EngineError("feature_source=external requires embeddings_path")
    return features_mod.import_embeddings(config.embeddings_path, pool)


def start_session(
    pool: Pool,
    config: SessionConfig,
    features: FeatureMatrix | None = None,
    checkpoint_path: str | Path | None = None,
) -> SessionState:
    """Open a session: draw the random seed batch and await its labels."""
    if config.pool_subsample is not None:
        pool = subsample_unlabeled(pool, config.pool_subsample, config.seed)
    if not pool.unlabeled_ids:
        raise EngineError("pool has no unlabeled documents")
    if not pool.test_ids:
        raise EngineError("pool has no test documents")
    if config.seed_batch_size > len(pool.unlabeled_ids):
        raise EngineError(
            f"seed batch size {config.seed_batch_size} exceeds unlabeled pool "
            f"size {len(pool.unlabeled_ids)}"
        )
    if features is None:
        features = _build_features(pool, config)
    else:
        for doc_id in pool.documents:
            features.index_of(doc_id)

    # The seed batch is random regardless of the session strategy: there is
    # no model yet to rank candidates.
    seed_batch = strategies.query_random(
        QueryContext(
            unlabeled_ids=pool.unlabeled_ids,
            labeled_ids=pool.labeled_ids,
            batch_size=config.seed_batch_size,
            seed=_round_seed(config.seed, 0),
        )
    )
    state = SessionState(
        config=config,
        pool=pool,
        round=0,
        phase=PHASE_AWAITING,
        pending_batch=seed_batch,
        history=(),
        model_snapshots={},
        features=features,
        model=None,
        base_pool_jsonl=pool_to_jsonl(pool),
        checkpoint_path=Path(checkpoint_path) if checkpoint_path else None,
    )
    if state.checkpoint_path is not None:
        checkpoint(state, state.checkpoint_path)
    return state


def _model_ref(snapshot: dict) -> str:
    canonical = json.dumps(snapshot, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _fit_round_model(features: FeatureMatrix, labeled: Mapping[str, Label], hp: Hyperparams) -> LinearModel:
    """Retrain from scratch; a single-class labeled set (possible in small
    seed batches) falls back to a smoothed prior instead of failing."""
    if len(set(labeled.values())) == 2:
        return model_mod.train(features, dict(labeled), hp)
    n = len(labeled)
    n_related = sum(1 for l in labeled.values() if l == Label.RELATED)
    prior = (n_related + 1.0) / (n + 2.0)  # Laplace-smoothed class prior
    return LinearModel(
        weights=np.zeros(features.dim),
        bias=math.log(prior / (1.0 - prior)),
        trained_on=n,
        hyperparams=hp,
    )


def _test_metrics(state_round: int, pool: Pool, features: FeatureMatrix, model: LinearModel) -> RoundMetrics:
    test_features = features.subset(pool.test_ids)
    predictions = model_mod.predict(model, test_features)
    predicted = model_mod.predictions_to_labels(predictions)
    gold = {i: pool.gold(i) for i in pool.test_ids}
    report = evaluation.evaluate(predicted, gold)
    return RoundMetrics(
        round=state_round,
        accuracy=report.accuracy,
        f1_related=report.f1_related,
        f1_unrelated=report.f1_unrelated,
        labeled_count=len(pool.labeled),
    )


def _next_batch(
    config: SessionConfig,
    pool: Pool,
    features: FeatureMatrix,
    model: LinearModel,
    round_index: int,
) -> QueryBatch:
    predictions = None
    if config.strategy in ("lc", "pe", "bt"):
        preds = model_mod.predict(model, features.subset(pool.unlabeled_ids))
        predictions = {p.id: p.p_related for p in preds}
    ctx = QueryContext(
        unlabeled_ids=pool.unlabeled_ids,
        labeled_ids=pool.labeled_ids,
        predictions=predictions,
        features=features,
        batch_size=config.batch_size,
        seed=_round_seed(config.seed, round_index),
    )
    return strategies.query(config.strategy, ctx)


def submit_labels(state: SessionState, labels: Mapping[str, int | Label]) -> SessionState:
    """Apply one full batch of labels and advance the session.

    The submission is atomic: the label ids must exactly equal the pending
    batch ids, otherwise the state is left untouched and an error raised.
    """
    if state.phase == PHASE_FINISHED:
        raise EngineError("session is finished; no labels are expected")
    if state.phase != PHASE_AWAITING or state.pending_batch is None:
        raise EngineError(f"session is not awaiting labels (phase={state.phase})")
    expected = set(state.pending_batch.ids)
    got = set(labels)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        parts = []
        if missing:
            parts.append(f"missing ids: {missing[:10]}")
        if extra:
            parts.append(f"unexpected ids: {extra[:10]}")
        raise EngineError("label submission does not match pending batch; " + "; ".join(parts))

    resolved = {i: Label(labels[i]) for i in state.pending_batch.ids}
    pool = state.pool.assign_labels(resolved)
    model = _fit_round_model(state.features, pool.labeled, state.config.hyperparams)
    metrics = _test_metrics(state.round, pool, state.features, model)
    snapshot = model_mod.model_to_dict(model)
    ref = _model_ref(snapshot)
    record = RoundRecord(
        round=state.round,
        queried_ids=state.pending_batch.ids,
        labels=resolved,
        metrics=metrics,
        model_ref=ref,
    )
    history = (*state.history, record)
    snapshots = {**state.model_snapshots, ref: snapshot}

    if state.round == state.config.rounds:
        new_state = replace(
            state,
            pool=pool,
            model=model,
            history=history,
            model_snapshots=snapshots,
            phase=PHASE_FINISHED,
            pending_batch=None,
        )
    else:
        next_round = state.round + 1
        batch = _next_batch(state.config, pool, state.features, model, next_round)
        new_state = replace(
            state,
            pool=pool,
            model=model,
            history=history,
            model_snapshots=snapshots,
            round=next_round,
            pending_batch=batch,
            phase=PHASE_AWAITING,
        )
    if new_state.checkpoint_path is not None:
        checkpoint(new_state, new_state.checkpoint_path)
    return new_state


# -- persistence -------------------------------------------------------------


def _batch_to_dict(batch: QueryBatch | None) -> dict | None:
    if batch is None:
        return None
    return {
        "ids": list(batch.ids),
        "strategy": batch.strategy,
        "scores": dict(batch.scores) if batch.scores is not None else None,
    }


def _batch_from_dict(payload: dict | None) -> QueryBatch | None:
    if payload is None:
        return None
    return QueryBatch(
        ids=tuple(payload["ids"]),
        strategy=payload["strategy"],
        scores=payload["scores"],
    )


def checkpoint(state: SessionState, path: str | Path) -> None:
    """Write a versioned checkpoint; the pool is referenced by content hash.

    The base pool snapshot is stored once per session as a content-addressed
    sibling file; checkpoints carry only the current partition lists.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pool_bytes = state.base_pool_jsonl.encode("utf-8")
    pool_sha = hashlib.sha256(pool_bytes).hexdigest()
    pool_file = path.parent / f"pool-{pool_sha[:16]}.jsonl"
    if not pool_file.exists():
        pool_file.write_bytes(pool_bytes)

    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": state.config.to_dict(),
        "round": state.round,
        "phase": state.phase,
        "pending_batch": _batch_to_dict(state.pending_batch),
        "history": [
            {
                "round": rec.round,
                "queried_ids": list(rec.queried_ids),
                "labels": {i: int(l) for i, l in rec.labels.items()},
                "metrics": rec.metrics.to_dict(),
                "model_ref": rec.model_ref,
            }
            for rec in state.history
        ],
        "model_snapshots": {ref: snap for ref, snap in state.model_snapshots.items()},
        "partitions": {
            "labeled": [[i, int(l)] for i, l in state.pool.labeled.items()],
            "unlabeled": list(state.pool.unlabeled_ids),
            "test": list(state.pool.test_ids),
        },
        "pool": {"path": pool_file.name, "sha256": pool_sha},
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    path.write_text(text + "\n", encoding="utf-8")


def resume(path: str | Path) -> SessionState:
    """Rebuild a session from a checkpoint file.

    Features are recomputed (deterministic), the current model is restored
    from its snapshot, and the pool is loaded from the referenced snapshot
    file after its content hash is verified.
    """
    path = Path(path)
    if not path.exists():
        raise EngineError(f"checkpoint file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EngineError(f"corrupt checkpoint {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(payload, dict) or "format" not in payload:
        raise EngineError(f"corrupt checkpoint {path}: missing format tag")
    if payload["format"] != CHECKPOINT_FORMAT:
        raise EngineError(
            f"checkpoint version mismatch: found {payload['format']!r}, "
            f"this engine reads {CHECKPOINT_FORMAT!r}"
        )

    pool_ref = payload["pool"]
    pool_file = path.parent / pool_ref["path"]
    if not pool_file.exists():
        raise EngineError(f"pool snapshot missing: {pool_file}")
    pool_bytes = pool_file.read_bytes()
    actual_sha = hashlib.sha256(pool_bytes).hexdigest()
    if actual_sha != pool_ref["sha256"]:
        raise EngineError(
            f"pool snapshot {pool_file} drifted: hash {actual_sha[:16]}... does "
            f"not match checkpoint {pool_ref['sha256'][:16]}..."
        )

    config = SessionConfig.from_dict(payload["config"])
    base_pool = ingest(pool_file)
    parts = payload["partitions"]
    pool = Pool(
        documents=base_pool.documents,
        labeled={i: Label(v) for i, v in parts["labeled"]},
        unlabeled_ids=tuple(parts["unlabeled"]),
        test_ids=tuple(parts["test"]),
    )
    features = _build_features(pool, config)

    history = []
    for rec in payload["history"]:
        history.append(
            RoundRecord(
                round=rec["round"],
                queried_ids=tuple(rec["queried_ids"]),
                labels={i: Label(v) for i, v in rec["labels"].items()},
                metrics=RoundMetrics(**rec["metrics"]),
                model_ref=rec["model_ref"],
            )
        )
    snapshots = dict(payload["model_snapshots"])
    model = None
    if history:
        model = model_mod.model_from_dict(snapshots[history[-1].model_ref])

    return SessionState(
        config=config,
        pool=pool,
        round=payload["round"],
        phase=payload["phase"],
        pending_batch=_batch_from_dict(payload["pending_batch"]),
        history=tuple(history),
        model_snapshots=snapshots,
        features=features,
        model=model,
        base_pool_jsonl=pool_bytes.decode("utf-8"),
        checkpoint_path=path,
    )


# -- simulation ---------------------------------------------------------------


def run_simulated(
    pool: Pool,
    config: SessionConfig,
    features: FeatureMatrix | None = None,
    checkpoint_path: str | Path | None = None,
) -> list[RoundMetrics]:
    """Run the full protocol answering queries from gold labels.

    Requires a gold label on every unlabeled document; returns the per-round
    metric series (seed round first).
    """
    missing = [i for i in pool.unlabeled_ids if pool.gold(i) is None]
    if missing:
        raise EngineError(f"unlabeled documents without gold labels: {missing[:10]}")
    state = start_session(pool, config, features=features, checkpoint_path=checkpoint_path)
    while state.phase == PHASE_AWAITING:
        assert state.pending_batch is not None
        answers = {i: state.pool.gold(i) for i in state.pending_batch.ids}
        state = submit_labels(state, answers)
    return state.metrics_history


METRICS_CSV_HEADER = "round,labeled_count,accuracy,f1_unrelated,f1_related"


def metrics_to_csv(metrics: Sequence[RoundMetrics]) -> str:
    """Fig-2-style metric series as CSV (full float precision)."""
    lines = [METRICS_CSV_HEADER]
    for m in metrics:
        lines.append(
            f"{m.round},{m.labeled_count},{m.accuracy!r},{m.f1_unrelated!r},{m.f1_related!r}"
        )
    return "\n".join(lines) + "\n"
