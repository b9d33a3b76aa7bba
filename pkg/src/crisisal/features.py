"""Numeric document vectors: internal TF-IDF or imported external embeddings.

The TF-IDF space is the self-contained default; the embedding exchange
format lets any external model (e.g. a fine-tuned transformer) supply the
representation space instead. Both feed the same feature matrix type.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .textutil import tokenize

__all__ = [
    "Vocabulary",
    "FeatureMatrix",
    "fit_vocabulary",
    "transform_tfidf",
    "import_embeddings",
    "export_embeddings",
    "EMBEDDING_FORMAT",
]

EMBEDDING_FORMAT = "emb-v1"


def _texts(docs: Sequence) -> list[str]:
    return [doc if isinstance(doc, str) else doc.text for doc in docs]


def _ids(docs: Sequence) -> list[str]:
    return [f"doc{i}" if isinstance(doc, str) else doc.id for i, doc in enumerate(docs)]


@dataclass(frozen=True)
class Vocabulary:
    """Term index plus the document frequencies it was fitted on."""

    index: Mapping[str, int]
    document_frequency: Mapping[str, int]
    n_documents: int

    def __post_init__(self) -> None:
        if sorted(self.index.values()) != list(range(len(self.index))):
            raise ValueError("term indices must be contiguous from 0")
        for term in self.index:
            if self.document_frequency.get(term, 0) < 1:
                raise ValueError(f"term {term!r} has no document frequency")

    def __len__(self) -> int:
        return len(self.index)

    def idf(self, term: str) -> float:
        """Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1."""
        df = self.document_frequency[term]
        return math.log((1 + self.n_documents) / (1 + df)) + 1.0

    def to_dict(self) -> dict:
        terms = sorted(self.index, key=self.index.__getitem__)
        return {
            "terms": terms,
            "df": [self.document_frequency[t] for t in terms],
            "n_documents": self.n_documents,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "Vocabulary":
        terms = list(payload["terms"])
        dfs = list(payload["df"])
        return cls(
            index={t: i for i, t in enumerate(terms)},
            document_frequency=dict(zip(terms, dfs)),
            n_documents=int(payload["n_documents"]),
        )


@dataclass(frozen=True)
class FeatureMatrix:
    """One numeric vector per document id, all of identical dimension.

    ``matrix`` is a dense ndarray or a CSR matrix with one row per id, in
    the same order as ``ids``. Rows that vectorized to all zeros (every
    token out of vocabulary) are listed in ``zero_rows``.
    """

    ids: tuple[str, ...]
    matrix: np.ndarray | sparse.csr_matrix
    space_tag: str
    zero_rows: tuple[str, ...] = ()
    _row_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.space_tag not in ("tfidf", "external"):
            raise ValueError(f"unknown space tag {self.space_tag!r}")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("row ids must be unique")
        if self.matrix.shape[0] != len(self.ids):
            raise ValueError("row count does not match id count")
        data = self.matrix.data if sparse.issparse(self.matrix) else self.matrix
        if not np.all(np.isfinite(data)):
            raise ValueError("feature matrix contains NaN/Inf entries")
        self._row_index.update({doc_id: i for i, doc_id in enumerate(self.ids)})

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def index_of(self, doc_id: str) -> int:
        try:
            return self._row_index[doc_id]
        except KeyError:
            raise KeyError(f"no feature row for document {doc_id!r}") from None

    def rows(self, doc_ids: Iterable[str]) -> np.ndarray | sparse.csr_matrix:
        """Submatrix for the given ids, in the given order."""
        idx = [self.index_of(i) for i in doc_ids]
        return self.matrix[idx]

    def subset(self, doc_ids: Sequence[str]) -> "FeatureMatrix":
        zero = set(self.zero_rows)
        return FeatureMatrix(
            ids=tuple(doc_ids),
            matrix=self.rows(doc_ids),
            space_tag=self.space_tag,
            zero_rows=tuple(i for i in doc_ids if i in zero),
        )

    def row_dense(self, doc_id: str) -> np.ndarray:
        row = self.matrix[self.index_of(doc_id)]
        return row.toarray().ravel() if sparse.issparse(row) else np.asarray(row).ravel()


def fit_vocabulary(docs: Sequence, min_df: int = 1, max_features: int | None = None) -> Vocabulary:
    """Build the vocabulary of the max_features highest-df terms with df >= min_df.

    Ties in document frequency are broken lexicographically. Tokenization is
    lowercase Unicode word segmentation.
    """
    if not docs:
        raise ValueError("document list must be nonempty")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: dict[str, int] = {}
    any_tokens = False
    for text in _texts(docs):
        terms = set(tokenize(text))
        if terms:
            any_tokens = True
        for term in terms:
            df[term] = df.get(term, 0) + 1
    if not any_tokens:
        raise ValueError("all documents are empty after tokenization")
    eligible = [t for t, c in df.items() if c >= min_df]
    if not eligible:
        raise ValueError(f"no term reaches min_df={min_df}")
    eligible.sort(key=lambda t: (-df[t], t))
    if max_features is not None:
        eligible = eligible[:max_features]
    return Vocabulary(
        index={t: i for i, t in enumerate(eligible)},
        document_frequency={t: df[t] for t in eligible},
        n_documents=len(docs),
    )


def transform_tfidf(docs: Sequence, vocab: Vocabulary) -> FeatureMatrix:
    """Vectorize documents as L2-normalized smoothed TF-IDF rows.

    Entry = tf(term, doc) * (ln((1+N)/(1+df)) + 1). Out-of-vocabulary terms
    are ignored; all-OOV documents yield zero rows, which are exempt from
    the unit-norm invariant and flagged in ``zero_rows``.
    """
    ids = _ids(docs)
    idf = np.empty(len(vocab))
    for term, i in vocab.index.items():
        idf[i] = vocab.idf(term)

    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    zero_rows: list[str] = []
    for doc_id, text in zip(ids, _texts(docs)):
        counts: dict[int, int] = {}
        for token in tokenize(text):
            col = vocab.index.get(token)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        if not counts:
            zero_rows.append(doc_id)
            indptr.append(len(data))
            continue
        cols = sorted(counts)
        values = np.array([counts[c] * idf[c] for c in cols])
        norm = math.sqrt(float(np.dot(values, values)))
        values /= norm
        data.extend(values.tolist())
        indices.extend(cols)
        indptr.append(len(data))

    matrix = sparse.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
        shape=(len(ids), len(vocab)),
    )
    return FeatureMatrix(tuple(ids), matrix, "tfidf", tuple(zero_rows))


def import_embeddings(path: str | Path, pool) -> FeatureMatrix:
    """Read an embedding exchange file and align it with the pool.

    The file is JSONL: a header line ``{"format": "emb-v1", "dim": D}``
    followed by ``{"id": ..., "vec": [D floats]}`` lines. Every pool id must
    be present; extra ids are ignored. Rows come out in pool document order.
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8") as handle:
        try:
            header = json.loads(handle.readline())
        except json.JSONDecodeError:
            raise ValueError(f"{path}: first line must be the emb-v1 header") from None
        if not isinstance(header, dict) or header.get("format") != EMBEDDING_FORMAT:
            raise ValueError(f"{path}: first line must be the {EMBEDDING_FORMAT} header")
        dim = header.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise ValueError(f"{path}: invalid dim {dim!r}")
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            vec = np.asarray(row.get("vec"), dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(
                    f"{path}: line {lineno}: vector dim {vec.shape} does not match header dim {dim}"
                )
            vectors[str(row["id"])] = vec

    wanted = list(pool.documents)
    missing = [i for i in wanted if i not in vectors]
    if missing:
        shown = ", ".join(missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValueError(f"{path}: missing embeddings for ids: {shown}{more}")
    matrix = np.vstack([vectors[i] for i in wanted]) if wanted else np.zeros((0, dim))
    return FeatureMatrix(tuple(wanted), matrix, "external")


def export_embeddings(features: FeatureMatrix, path: str | Path) -> None:
    """Write a feature matrix in the embedding exchange format."""
    lines = [json.dumps({"format": EMBEDDING_FORMAT, "dim": features.dim})]
    for doc_id in features.ids:
        vec = features.row_dense(doc_id)
        lines.append(json.dumps({"id": doc_id, "vec": [float(v) for v in vec]}))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
