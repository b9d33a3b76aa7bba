"""Trainable probabilistic binary classifier plus external prediction import.

A deliberately simple stand-in for a fine-tuned transformer: logistic
regression fitted by full-batch gradient descent. It is deterministic,
retrained from scratch each AL round, and cheap enough to oracle-check
(the analytic gradient is tested against finite differences).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from .corpus import Label

__all__ = [
    "Hyperparams",
    "LinearModel",
    "Prediction",
    "train",
    "predict",
    "loss_and_gradient",
    "import_predictions",
    "export_predictions",
    "predictions_to_labels",
    "save_model",
    "load_model",
    "MODEL_FORMAT",
]

MODEL_FORMAT = "model-v1"


@dataclass(frozen=True)
class Hyperparams:
    """Fixed-step full-batch gradient descent settings.

    ``seed`` is carried for interface stability; training starts from zero
    weights, so nothing currently consumes it. ``class_weight`` may be
    "none" or "balanced" (inverse-frequency example weights).
    """

    learning_rate: float = 0.5
    l2_penalty: float = 1e-4
    epochs: int = 200
    seed: int = 0
    class_weight: str = "none"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.class_weight not in ("none", "balanced"):
            raise ValueError(f"unknown class_weight {self.class_weight!r}")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "l2_penalty": self.l2_penalty,
            "epochs": self.epochs,
            "seed": self.seed,
            "class_weight": self.class_weight,
        }


@dataclass(frozen=True)
class LinearModel:
    """Immutable trained snapshot: p(related | x) = sigmoid(w.x + b)."""

    weights: np.ndarray
    bias: float
    trained_on: int
    hyperparams: Hyperparams
    loss_history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class Prediction:
    """Probability that one document is related."""

    id: str
    p_related: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_related <= 1.0:
            raise ValueError(f"p_related for {self.id!r} outside [0, 1]: {self.p_related}")

    @property
    def p_unrelated(self) -> float:
        return 1.0 - self.p_related


def _as_array(matrix) -> np.ndarray | sparse.csr_matrix:
    return matrix


def loss_and_gradient(
    weights: np.ndarray,
    bias: float,
    X,
    y: np.ndarray,
    l2_penalty: float,
    sample_weight: np.ndarray | None = None,
) -> tuple[float, np.ndarray, float]:
    """Regularized mean log-loss and its analytic gradient.

    loss = mean_w(softplus(z) - y*z) + l2/2 * ||w||^2 with z = Xw + b; the
    bias is not penalized. Weighted means normalize by the weight total.
    """
    z = np.asarray(X @ weights).ravel() + bias
    if sample_weight is None:
        sample_weight = np.ones_like(y, dtype=np.float64)
    total = float(sample_weight.sum())
    # softplus(z) - y*z is the numerically stable per-example cross entropy
    per_example = np.logaddexp(0.0, z) - y * z
    loss = float(np.dot(sample_weight, per_example) / total)
    loss += 0.5 * l2_penalty * float(np.dot(weights, weights))
    residual = (expit(z) - y) * sample_weight / total
    grad_w = np.asarray(X.T @ residual).ravel() + l2_penalty * weights
    grad_b = float(residual.sum())
    return loss, grad_w, grad_b


def train(features, labels: Mapping[str, Label], hyperparams: Hyperparams | None = None) -> LinearModel:
    """Fit logistic regression on the labeled rows of a feature matrix.

    Full-batch gradient descent from zero weights; deterministic, and the
    recorded loss history is non-increasing for the default step size on
    unit-norm rows. Requires at least one example of each class.
    """
    hp = hyperparams or Hyperparams()
    if not labels:
        raise ValueError("no labeled examples")
    ids = list(labels)
    X = features.rows(ids)
    y = np.array([float(Label(labels[i])) for i in ids])
    classes = set(y.tolist())
    if classes != {0.0, 1.0}:
        raise ValueError("degenerate training set: need at least one example of each class")

    sample_weight = None
    if hp.class_weight == "balanced":
        n, n_pos = len(y), float(y.sum())
        weight_pos = n / (2.0 * n_pos)
        weight_neg = n / (2.0 * (n - n_pos))
        sample_weight = np.where(y == 1.0, weight_pos, weight_neg)

    w = np.zeros(features.dim)
    b = 0.0
    history = []
    for _ in range(hp.epochs):
        loss, grad_w, grad_b = loss_and_gradient(w, b, X, y, hp.l2_penalty, sample_weight)
        history.append(loss)
        w = w - hp.learning_rate * grad_w
        b = b - hp.learning_rate * grad_b
    final_loss, _, _ = loss_and_gradient(w, b, X, y, hp.l2_penalty, sample_weight)
    history.append(final_loss)
    return LinearModel(
        weights=w,
        bias=b,
        trained_on=len(ids),
        hyperparams=hp,
        loss_history=tuple(history),
    )


def predict(model: LinearModel, features) -> list[Prediction]:
    """Score every row of the feature matrix, in row order."""
    if features.dim != model.dim:
        raise ValueError(f"feature dim {features.dim} does not match model dim {model.dim}")
    z = np.asarray(features.matrix @ model.weights).ravel() + model.bias
    probs = expit(z)
    return [Prediction(doc_id, float(p)) for doc_id, p in zip(features.ids, probs)]


def predictions_to_labels(
    predictions: Sequence[Prediction], threshold: float = 0.5
) -> dict[str, Label]:
    """Threshold probabilities into hard labels (p >= threshold -> related)."""
    return {
        p.id: Label.RELATED if p.p_related >= threshold else Label.UNRELATED
        for p in predictions
    }


def import_predictions(path: str | Path, pool) -> list[Prediction]:
    """Read externally computed predictions for every pool document.

    JSONL of ``{"id": ..., "p_related": float}``; ids not in the pool are
    ignored, missing pool ids and out-of-range probabilities are errors.
    Output order matches pool document order.
    """
    path = Path(path)
    scores: dict[str, float] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            doc_id = str(row.get("id") or "")
            p = row.get("p_related")
            if not isinstance(p, (int, float)) or not 0.0 <= float(p) <= 1.0:
                raise ValueError(f"{path}: line {lineno}: p_related outside [0, 1]: {p!r}")
            scores[doc_id] = float(p)
    missing = [i for i in pool.documents if i not in scores]
    if missing:
        shown = ", ".join(missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValueError(f"{path}: missing predictions for ids: {shown}{more}")
    return [Prediction(i, scores[i]) for i in pool.documents]


def export_predictions(predictions: Sequence[Prediction], path: str | Path) -> None:
    """Write predictions in the exchange format (JSONL of id / p_related)."""
    lines = [json.dumps({"id": p.id, "p_related": p.p_related}) for p in predictions]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def model_to_dict(model: LinearModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "dim": model.dim,
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
        "trained_on": model.trained_on,
        "hyperparams": model.hyperparams.to_dict(),
    }


def model_from_dict(payload: Mapping) -> LinearModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {payload.get('format')!r}")
    weights = np.asarray(payload["weights"], dtype=np.float64)
    if weights.shape != (int(payload["dim"]),):
        raise ValueError("weight count does not match declared dim")
    return LinearModel(
        weights=weights,
        bias=float(payload["bias"]),
        trained_on=int(payload["trained_on"]),
        hyperparams=Hyperparams(**payload["hyperparams"]),
    )


def save_model(model: LinearModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LinearModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
