"""Exact and fuzzy keyword classification of documents.

Exact matching is a case-insensitive substring containment check. Fuzzy
matching works at token granularity: a keyword matches when some window of
consecutive text tokens (same token count as the keyword) is within the
Levenshtein budget. The two granularities intentionally differ; see the
module tests for the canonical counterexample ("flut" inside "flutwelle"
matches exactly but not fuzzily).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from ._kernels import BACKEND, bounded_edit_distance, edit_distance
from .corpus import Label, Pool
from .textutil import tokenize

__all__ = [
    "KeywordList",
    "EditDistanceBudget",
    "edit_distance",
    "bounded_edit_distance",
    "match_exact",
    "match_fuzzy",
    "classify_pool",
    "builtin_keyword_lists",
    "load_keywords",
    "kernel_backend",
    "CHILE_PREFILTER_KEYWORDS",
]

# Pre-filter terms used to narrow an oversized wildfire corpus before AL.
CHILE_PREFILTER_KEYWORDS = ("incendio", "fuego", "fire")


def kernel_backend() -> str:
    """Which edit-distance kernel is active: "cython" or "python"."""
    return BACKEND


@dataclass(frozen=True)
class KeywordList:
    """Ordered, duplicate-free list of lowercase keywords.

    ``languages`` is descriptive metadata only; matching never consults it.
    """

    keywords: tuple[str, ...]
    languages: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError("keyword list must be nonempty")
        seen: set[str] = set()
        for kw in self.keywords:
            if not kw.strip():
                raise ValueError("keywords must be nonempty after trim")
            if kw != kw.casefold():
                raise ValueError(f"keyword {kw!r} must be lowercase")
            if kw in seen:
                raise ValueError(f"duplicate keyword {kw!r}")
            seen.add(kw)

    def __iter__(self) -> Iterator[str]:
        return iter(self.keywords)

    def __len__(self) -> int:
        return len(self.keywords)

    @classmethod
    def from_terms(cls, terms: Iterable[str], languages: Iterable[str] = ()) -> "KeywordList":
        """Normalize (NFC + casefold + trim) and wrap raw terms."""
        normalized = []
        seen = set()
        for term in terms:
            term = unicodedata.normalize("NFC", term).strip().casefold()
            if term and term not in seen:
                normalized.append(term)
                seen.add(term)
        return cls(tuple(normalized), frozenset(languages))


def load_keywords(path: str | Path) -> KeywordList:
    """Read a keyword file: one keyword per line, ``#`` comments allowed.

    A ``# languages: de,en`` comment populates the metadata field.
    """
    languages: list[str] = []
    terms: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("languages:"):
                languages = [t.strip() for t in body.split(":", 1)[1].split(",") if t.strip()]
            continue
        terms.append(stripped)
    return KeywordList.from_terms(terms, languages)


def builtin_keyword_lists() -> dict[str, KeywordList]:
    """The keyword lists shipped with the package, keyed by list name."""
    lists = {}
    root = resources.files("crisisal").joinpath("keywords")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            with resources.as_file(entry) as concrete:
                lists[entry.name[: -len(".txt")]] = load_keywords(concrete)
    return lists


@dataclass(frozen=True)
class EditDistanceBudget:
    """Maximum tolerated Levenshtein distance for a fuzzy match."""

    max_distance: int = 2

    def __post_init__(self) -> None:
        if self.max_distance < 0:
            raise ValueError("max_distance must be >= 0")


def match_exact(text: str, keywords: Iterable[str]) -> bool:
    """True iff some keyword is a case-insensitive substring of the text."""
    folded = text.casefold()
    return any(kw.casefold() in folded for kw in keywords)


def match_fuzzy(
    text: str,
    keywords: Iterable[str],
    budget: EditDistanceBudget | int = EditDistanceBudget(),
) -> bool:
    """True iff some token window of the text is within the edit budget.

    The text is lowercased and split on Unicode whitespace/punctuation;
    multiword keywords compare against space-joined windows of the same
    token count. Budget 0 degenerates to token-exact matching.
    """
    max_distance = budget.max_distance if isinstance(budget, EditDistanceBudget) else int(budget)
    if max_distance < 0:
        raise ValueError("max_distance must be >= 0")
    tokens = tokenize(text)
    if not tokens:
        return False
    for kw in keywords:
        kw_tokens = tokenize(kw)
        if not kw_tokens:
            continue
        width = len(kw_tokens)
        if width > len(tokens):
            continue
        needle = " ".join(kw_tokens)
        for start in range(len(tokens) - width + 1):
            window = " ".join(tokens[start : start + width])
            if bounded_edit_distance(window, needle, max_distance) <= max_distance:
                return True
    return False


def classify_pool(
    pool: Pool,
    keywords: KeywordList,
    mode: str = "exact",
    budget: EditDistanceBudget | None = None,
) -> dict[str, Label]:
    """Predict related/unrelated for every pool document via keyword matching."""
    if pool.n_documents == 0:
        raise ValueError("pool must be nonempty")
    if mode not in ("exact", "fuzzy"):
        raise ValueError(f"unknown mode {mode!r}")
    budget = budget or EditDistanceBudget()
    predictions: dict[str, Label] = {}
    for doc in pool.iter_documents():
        if mode == "exact":
            hit = match_exact(doc.text, keywords)
        else:
            hit = match_fuzzy(doc.text, keywords, budget)
        predictions[doc.id] = Label.RELATED if hit else Label.UNRELATED
    return predictions
