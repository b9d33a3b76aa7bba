"""Document pools: ingestion, label mapping, pre-filtering, splits, persistence.

The pool is the unit every other part of the system works on: an immutable
collection of short texts partitioned into labeled / unlabeled / test sets.
All operations return new pools; nothing mutates in place, so pools can be
shared freely across workers.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
import unicodedata
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Label",
    "Document",
    "LabelMapping",
    "Pool",
    "IngestError",
    "crisislex_mapping",
    "ingest",
    "export",
    "pool_to_jsonl",
    "pool_fingerprint",
    "write_documents",
    "prefilter",
    "split",
    "release_labeled",
    "balance_labeled",
    "dedup",
    "subsample_unlabeled",
]


class Label(IntEnum):
    """Binary relatedness label; the integer codes are part of the wire format."""

    UNRELATED = 0
    RELATED = 1


class IngestError(ValueError):
    """An input file violated the corpus contracts."""


def _normalize_text(text: str) -> str:
    # NFC + outer trim only; inner casing is preserved for display.
    return unicodedata.normalize("NFC", text).strip()


def _parse_label(value: object) -> Label | None:
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise ValueError(f"invalid label {value!r}")
    if isinstance(value, int):
        if value in (0, 1):
            return Label(value)
        raise ValueError(f"invalid label {value!r}")
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("0", "unrelated"):
            return Label.UNRELATED
        if token in ("1", "related"):
            return Label.RELATED
        raise ValueError(f"invalid label {value!r}")
    raise ValueError(f"invalid label {value!r}")


@dataclass(frozen=True)
class Document:
    """One short text; the unit of a pool."""

    id: str
    text: str
    lang: str = "und"
    gold_label: Label | None = None
    source: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be nonempty")
        if not self.text.strip():
            raise ValueError(f"document {self.id!r}: text empty after trim")


@dataclass(frozen=True)
class LabelMapping:
    """Maps (source scheme, source label) pairs to a target label or a drop.

    A ``None`` target means rows carrying that source label are dropped and
    produce no document.
    """

    entries: tuple[tuple[str, str, Label | None], ...]

    def __post_init__(self) -> None:
        seen: set[tuple[str, str]] = set()
        for scheme, source, _target in self.entries:
            key = (scheme, source)
            if key in seen:
                raise ValueError(f"duplicate mapping entry for {key}")
            seen.add(key)

    def lookup(self, source_label: str, scheme: str | None = None) -> Label | None:
        """Resolve a raw source label to a target Label (or None for drop).

        Raises IngestError when the label is unmapped, or when it is
        ambiguous across schemes and no scheme was given.
        """
        hits = [
            (s, target)
            for s, src, target in self.entries
            if src == source_label and (scheme is None or s == scheme)
        ]
        if not hits:
            where = f" in scheme {scheme!r}" if scheme else ""
            raise IngestError(f"unmapped source label {source_label!r}{where}")
        if len({t for _, t in hits}) > 1:
            schemes = sorted(s for s, _ in hits)
            raise IngestError(
                f"source label {source_label!r} is ambiguous across schemes "
                f"{schemes}; pass an explicit scheme"
            )
        return hits[0][1]

    @classmethod
    def from_csv(cls, path: str | Path) -> "LabelMapping":
        """Read a mapping file: CSV with header ``scheme,source,target``.

        Target values are ``related``, ``unrelated`` or ``drop``.
        """
        path = Path(path)
        entries: list[tuple[str, str, Label | None]] = []
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            fields = set(reader.fieldnames or ())
            if not {"scheme", "source", "target"} <= fields:
                raise IngestError(
                    f"{path}: mapping file needs header scheme,source,target"
                )
            for lineno, row in enumerate(reader, start=2):
                target_token = (row["target"] or "").strip().lower()
                if target_token == "drop":
                    target: Label | None = None
                elif target_token in ("related", "unrelated"):
                    target = Label.RELATED if target_token == "related" else Label.UNRELATED
                else:
                    raise IngestError(
                        f"{path}: line {lineno}: invalid target {row['target']!r}"
                    )
                entries.append((row["scheme"].strip(), row["source"].strip(), target))
        return cls(tuple(entries))


def crisislex_mapping() -> LabelMapping:
    """Built-in mapping for the CrisisLexT6 / CrisisLexT26 annotation schemes."""
    return LabelMapping(
        (
            ("crisislext6", "on-topic", Label.RELATED),
            ("crisislext6", "off-topic", Label.UNRELATED),
            ("crisislext26", "Related and informative", Label.RELATED),
            ("crisislext26", "Related - but not informative", Label.RELATED),
            ("crisislext26", "Not related", Label.UNRELATED),
            ("crisislext26", "Not applicable", None),
        )
    )


@dataclass(frozen=True)
class Pool:
    """Immutable corpus partitioned into labeled / unlabeled / test sets.

    ``labeled`` maps ids to their *assigned* labels (human or gold at
    ingest); test documents carry their gold label on the Document itself.
    """

    documents: Mapping[str, Document]
    labeled: Mapping[str, Label]
    unlabeled_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        for doc_id, doc in self.documents.items():
            if doc.id != doc_id:
                raise ValueError(f"document key {doc_id!r} != document id {doc.id!r}")
        labeled = set(self.labeled)
        unlabeled = set(self.unlabeled_ids)
        test = set(self.test_ids)
        if len(self.unlabeled_ids) != len(unlabeled) or len(self.test_ids) != len(test):
            raise ValueError("duplicate ids within a partition")
        if labeled & unlabeled or labeled & test or unlabeled & test:
            overlap = sorted((labeled & unlabeled) | (labeled & test) | (unlabeled & test))
            raise ValueError(f"partitions overlap on ids {overlap[:10]}")
        for doc_id in (*labeled, *unlabeled, *test):
            if doc_id not in self.documents:
                raise ValueError(f"partition id {doc_id!r} has no document")
        for doc_id in self.test_ids:
            if self.documents[doc_id].gold_label is None:
                raise ValueError(f"test document {doc_id!r} has no gold label")

    # -- views -------------------------------------------------------------

    @property
    def labeled_ids(self) -> tuple[str, ...]:
        return tuple(self.labeled)

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    def document(self, doc_id: str) -> Document:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise KeyError(f"unknown document id {doc_id!r}") from None

    def gold(self, doc_id: str) -> Label | None:
        return self.document(doc_id).gold_label

    def iter_documents(self) -> Iterator[Document]:
        return iter(self.documents.values())

    # -- transitions ---------------------------------------------------------

    def assign_labels(self, labels: Mapping[str, Label]) -> "Pool":
        """Move unlabeled ids into the labeled partition with the given labels."""
        unlabeled = set(self.unlabeled_ids)
        for doc_id in labels:
            if doc_id not in unlabeled:
                raise ValueError(f"id {doc_id!r} is not in the unlabeled partition")
        new_labeled = dict(self.labeled)
        for doc_id, label in labels.items():
            new_labeled[doc_id] = Label(label)
        remaining = tuple(i for i in self.unlabeled_ids if i not in labels)
        return Pool(self.documents, new_labeled, remaining, self.test_ids)

    def replace_partitions(
        self,
        labeled: Mapping[str, Label],
        unlabeled_ids: Iterable[str],
        test_ids: Iterable[str],
    ) -> "Pool":
        return Pool(self.documents, dict(labeled), tuple(unlabeled_ids), tuple(test_ids))


def make_pool(
    documents: Iterable[Document],
    labeled: Mapping[str, Label] | None = None,
    unlabeled_ids: Iterable[str] | None = None,
    test_ids: Iterable[str] = (),
) -> Pool:
    """Build a pool; ids not mentioned in any partition become unlabeled."""
    docs: dict[str, Document] = {}
    for doc in documents:
        if doc.id in docs:
            raise ValueError(f"duplicate document id {doc.id!r}")
        docs[doc.id] = doc
    labeled = dict(labeled or {})
    test = tuple(test_ids)
    if unlabeled_ids is None:
        claimed = set(labeled) | set(test)
        unlabeled = tuple(i for i in docs if i not in claimed)
    else:
        unlabeled = tuple(unlabeled_ids)
    return Pool(docs, labeled, unlabeled, test)


# -- ingestion ---------------------------------------------------------------

_SPLITS = ("labeled", "unlabeled", "test")


def _read_jsonl_rows(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(row, dict):
                raise IngestError(f"{path}: line {lineno}: expected an object")
            yield lineno, row


def _read_csv_rows(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        fields = set(reader.fieldnames or ())
        if not {"id", "text"} <= fields:
            raise IngestError(f"{path}: CSV header must name at least id,text")
        for lineno, row in enumerate(reader, start=2):
            yield lineno, {k: v for k, v in row.items() if v is not None}


def ingest(
    path: str | Path,
    format: str = "jsonl",
    mapping: LabelMapping | None = None,
    scheme: str | None = None,
    as_test: bool = False,
) -> Pool:
    """Read a corpus file into a Pool.

    Documents without a gold label land in the unlabeled partition; gold
    labeled documents land in the labeled partition (or, with ``as_test``,
    in the test partition). A ``split`` field in the file overrides this.
    When a mapping is supplied, raw label strings are resolved through it;
    rows mapped to a drop produce no document.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"corpus file not found: {path}")
    if format == "jsonl":
        rows = _read_jsonl_rows(path)
    elif format == "csv":
        rows = _read_csv_rows(path)
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    docs: dict[str, Document] = {}
    labeled: dict[str, Label] = {}
    unlabeled: list[str] = []
    test: list[str] = []

    for lineno, row in rows:
        where = f"{path}: line {lineno}"
        doc_id = str(row.get("id") or "").strip()
        if not doc_id:
            raise IngestError(f"{where}: missing document id")
        if doc_id in docs:
            raise IngestError(f"{where}: duplicate document id {doc_id!r}")
        text = _normalize_text(str(row.get("text") or ""))
        if not text:
            raise IngestError(f"{where}: text empty after trim")
        lang = str(row.get("lang") or "und").strip().lower() or "und"

        raw_label = row.get("label")
        if mapping is not None and isinstance(raw_label, str) and raw_label.strip():
            try:
                gold = mapping.lookup(raw_label.strip(), scheme=scheme)
            except IngestError as exc:
                raise IngestError(f"{where}: {exc}") from None
            if gold is None:
                continue  # dropped row
        else:
            try:
                gold = _parse_label(raw_label)
            except ValueError as exc:
                raise IngestError(f"{where}: {exc}") from None

        doc = Document(
            id=doc_id,
            text=text,
            lang=lang,
            gold_label=gold,
            source=str(row.get("source") or ""),
        )
        docs[doc_id] = doc

        split_field = row.get("split")
        if split_field is not None:
            if split_field not in _SPLITS:
                raise IngestError(f"{where}: invalid split {split_field!r}")
            dest = split_field
        elif gold is None:
            dest = "unlabeled"
        else:
            dest = "test" if as_test else "labeled"

        if dest == "unlabeled":
            unlabeled.append(doc_id)
        elif dest == "test":
            if gold is None:
                raise IngestError(f"{where}: test document needs a gold label")
            test.append(doc_id)
        else:
            try:
                assigned = _parse_label(row.get("assigned"))
            except ValueError as exc:
                raise IngestError(f"{where}: {exc}") from None
            if assigned is None:
                assigned = gold
            if assigned is None:
                raise IngestError(f"{where}: labeled document needs a label")
            labeled[doc_id] = assigned

    return Pool(docs, labeled, tuple(unlabeled), tuple(test))


# -- persistence -------------------------------------------------------------


def _document_line(doc: Document, split: str, assigned: Label | None) -> str:
    obj: dict[str, object] = {
        "id": doc.id,
        "text": doc.text,
        "lang": doc.lang,
        "label": None if doc.gold_label is None else int(doc.gold_label),
    }
    if doc.source:
        obj["source"] = doc.source
    obj["split"] = split
    if split == "labeled" and assigned != doc.gold_label:
        obj["assigned"] = int(assigned)  # type: ignore[arg-type]
    return json.dumps(obj, ensure_ascii=False)


def pool_to_jsonl(pool: Pool) -> str:
    """Canonical JSONL serialization (document order, deterministic bytes)."""
    labeled = set(pool.labeled)
    test = set(pool.test_ids)
    lines = []
    for doc in pool.iter_documents():
        if doc.id in labeled:
            split, assigned = "labeled", pool.labeled[doc.id]
        elif doc.id in test:
            split, assigned = "test", None
        else:
            split, assigned = "unlabeled", None
        lines.append(_document_line(doc, split, assigned))
    return "\n".join(lines) + ("\n" if lines else "")


def export(pool: Pool, path: str | Path) -> None:
    """Write the pool as canonical JSONL; ``ingest`` reads it back identically."""
    Path(path).write_text(pool_to_jsonl(pool), encoding="utf-8")


def pool_fingerprint(pool: Pool) -> str:
    """Content hash of the canonical serialization; detects pool drift."""
    return hashlib.sha256(pool_to_jsonl(pool).encode("utf-8")).hexdigest()


def write_documents(documents: Iterable[Document], path: str | Path) -> None:
    """Write bare documents (no partition info) as corpus JSONL."""
    lines = []
    for doc in documents:
        obj: dict[str, object] = {
            "id": doc.id,
            "text": doc.text,
            "lang": doc.lang,
            "label": None if doc.gold_label is None else int(doc.gold_label),
        }
        if doc.source:
            obj["source"] = doc.source
        lines.append(json.dumps(obj, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


# -- pool operations ---------------------------------------------------------


def prefilter(pool: Pool, keywords: Iterable[str]) -> Pool:
    """Keep only documents containing any keyword (case-insensitive substring).

    Partition membership is preserved for the retained documents.
    """
    folded = [k.casefold() for k in keywords]
    if not folded:
        raise ValueError("keyword list must be nonempty")
    keep = {
        doc.id
        for doc in pool.iter_documents()
        if any(k in doc.text.casefold() for k in folded)
    }
    docs = {i: d for i, d in pool.documents.items() if i in keep}
    labeled = {i: l for i, l in pool.labeled.items() if i in keep}
    unlabeled = tuple(i for i in pool.unlabeled_ids if i in keep)
    test = tuple(i for i in pool.test_ids if i in keep)
    return Pool(docs, labeled, unlabeled, test)


def split(pool: Pool, test_fraction: float, seed: int) -> Pool:
    """Carve a stratified, seeded test set out of the gold-labeled documents.

    Each class contributes round(fraction * class size) documents, at least
    one when the class has two or more members and never the whole class.
    Sampling is deterministic under a fixed seed.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    existing_test = set(pool.test_ids)
    by_class: dict[Label, list[str]] = {Label.UNRELATED: [], Label.RELATED: []}
    for doc in pool.iter_documents():
        if doc.gold_label is not None and doc.id not in existing_test:
            by_class[doc.gold_label].append(doc.id)
    n_gold = sum(len(v) for v in by_class.values())
    if n_gold < 2:
        raise ValueError(f"need at least 2 gold-labeled documents to split, have {n_gold}")

    rng = random.Random(seed)
    selected: set[str] = set()
    for label in (Label.UNRELATED, Label.RELATED):
        candidates = by_class[label]
        n = len(candidates)
        if n == 0:
            continue
        k = round(test_fraction * n)
        if n >= 2 and k == 0:
            k = 1
        if k >= n:
            k = n - 1
        selected.update(rng.sample(candidates, k))

    labeled = {i: l for i, l in pool.labeled.items() if i not in selected}
    unlabeled = tuple(i for i in pool.unlabeled_ids if i not in selected)
    test = tuple(i for i in pool.documents if i in existing_test or i in selected)
    return Pool(pool.documents, labeled, unlabeled, test)


def release_labeled(pool: Pool) -> Pool:
    """Move all labeled ids back to the unlabeled partition.

    Assigned labels are discarded; gold labels stay on the documents, which
    makes the result usable as a simulation pool.
    """
    released = set(pool.labeled) | set(pool.unlabeled_ids)
    unlabeled = tuple(i for i in pool.documents if i in released)
    return Pool(pool.documents, {}, unlabeled, pool.test_ids)


def balance_labeled(pool: Pool, seed: int) -> Pool:
    """Downsample the majority class among labeled ids to the minority size.

    Removed documents are moved to the unlabeled partition, not dropped.
    """
    by_class: dict[Label, list[str]] = {Label.UNRELATED: [], Label.RELATED: []}
    for doc_id, label in pool.labeled.items():
        by_class[label].append(doc_id)
    sizes = {c: len(ids) for c, ids in by_class.items()}
    target = min(sizes.values())
    rng = random.Random(seed)
    keep: set[str] = set()
    for label in (Label.UNRELATED, Label.RELATED):
        ids = by_class[label]
        keep.update(ids if len(ids) <= target else rng.sample(ids, target))
    labeled = {i: l for i, l in pool.labeled.items() if i in keep}
    moved = set(pool.labeled) - keep
    unlabeled_set = set(pool.unlabeled_ids) | moved
    unlabeled = tuple(i for i in pool.documents if i in unlabeled_set)
    return Pool(pool.documents, labeled, unlabeled, pool.test_ids)


def dedup(pool: Pool) -> Pool:
    """Drop documents whose normalized text duplicates an earlier document."""
    seen: set[str] = set()
    keep: set[str] = set()
    for doc in pool.iter_documents():
        key = doc.text.casefold()
        if key not in seen:
            seen.add(key)
            keep.add(doc.id)
    docs = {i: d for i, d in pool.documents.items() if i in keep}
    labeled = {i: l for i, l in pool.labeled.items() if i in keep}
    unlabeled = tuple(i for i in pool.unlabeled_ids if i in keep)
    test = tuple(i for i in pool.test_ids if i in keep)
    return Pool(docs, labeled, unlabeled, test)


def subsample_unlabeled(pool: Pool, n: int, seed: int) -> Pool:
    """Uniformly keep n unlabeled documents (seeded); the rest are removed."""
    if n < 1:
        raise ValueError("subsample size must be >= 1")
    if n >= len(pool.unlabeled_ids):
        return pool
    rng = random.Random(seed)
    keep = set(rng.sample(list(pool.unlabeled_ids), n))
    removed = set(pool.unlabeled_ids) - keep
    docs = {i: d for i, d in pool.documents.items() if i not in removed}
    unlabeled = tuple(i for i in pool.unlabeled_ids if i in keep)
    return Pool(docs, dict(pool.labeled), unlabeled, pool.test_ids)
