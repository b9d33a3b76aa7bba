from __future__ import annotations

import numpy as np
import pytest

from crisisal.corpus import Document, Label, make_pool, release_labeled, split
from crisisal.features import FeatureMatrix
from crisisal.synth import synthetic_corpus


@pytest.fixture
def tiny_docs() -> list[Document]:
    return [
        Document("d1", "Gran incendio en Biobío", lang="es", gold_label=Label.RELATED),
        Document("d2", "buen día a todos", lang="es", gold_label=Label.UNRELATED),
        Document("d3", "FIREFIGHTERS on scene", lang="en", gold_label=Label.RELATED),
        Document("d4", "lovely picnic weather", lang="en", gold_label=Label.UNRELATED),
        Document("d5", "Hochwasser in Ahrweiler", lang="de", gold_label=Label.RELATED),
        Document("d6", "neues Rezept ausprobiert", lang="de", gold_label=Label.UNRELATED),
    ]


@pytest.fixture
def tiny_pool(tiny_docs):
    return make_pool(tiny_docs)


@pytest.fixture
def simulation_pool():
    """Small gold-labeled pool ready for simulated AL (test split carved out)."""
    docs = synthetic_corpus(300, seed=11)
    pool = make_pool(docs, labeled={d.id: d.gold_label for d in docs})
    return release_labeled(split(pool, 0.2, seed=5))


def dense_features(points: dict[str, np.ndarray]) -> FeatureMatrix:
    ids = tuple(points)
    matrix = np.vstack([np.asarray(points[i], dtype=np.float64) for i in ids])
    return FeatureMatrix(ids, matrix, "external")


@pytest.fixture
def announce(capsys):
    """Print a visible pass line for an acceptance criterion."""

    def _announce(name: str) -> None:
        with capsys.disabled():
            print(f"[acceptance] {name}: PASS")

    return _announce
