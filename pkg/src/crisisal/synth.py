"""Synthetic two-class corpora for demos, tests and strategy comparisons.

Documents of one class draw tokens from that class's private vocabulary
with a Zipf-like skew; a noise fraction of tokens is swapped for tokens of
the other class. The classes stay vocabulary-distinct but individual
documents can be ambiguous, which is what gives uncertainty-based querying
something to find.
"""

from __future__ import annotations

import numpy as np

from .corpus import Document, Label

__all__ = ["synthetic_corpus"]


def _class_vocab(prefix: str, size: int) -> list[str]:
    return [f"{prefix}{i:04d}" for i in range(size)]


def synthetic_corpus(
    n_documents: int = 2000,
    seed: int = 0,
    noise: float = 0.1,
    vocab_size: int = 400,
    tokens_per_doc: int = 8,
    zipf_exponent: float = 1.2,
) -> list[Document]:
    """Generate a gold-labeled corpus of two vocabulary-distinct classes.

    ``noise`` is the per-token probability of swapping in a token from the
    other class's vocabulary.
    """
    if not 0.0 <= noise < 1.0:
        raise ValueError("noise must be in [0, 1)")
    rng = np.random.default_rng(seed)
    vocabs = {
        Label.UNRELATED: _class_vocab("calm", vocab_size),
        Label.RELATED: _class_vocab("alert", vocab_size),
    }
    # Zipf-like token popularity: a few frequent terms, a long rare tail.
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    probs = ranks**-zipf_exponent
    probs /= probs.sum()

    documents = []
    for i in range(n_documents):
        label = Label.RELATED if i % 2 == 0 else Label.UNRELATED
        own = vocabs[label]
        other = vocabs[Label.UNRELATED if label == Label.RELATED else Label.RELATED]
        idx = rng.choice(vocab_size, size=tokens_per_doc, p=probs)
        tokens = [own[j] for j in idx]
        flip = rng.random(tokens_per_doc) < noise
        for pos in np.flatnonzero(flip):
            tokens[pos] = other[rng.choice(vocab_size, p=probs)]
        documents.append(
            Document(
                id=f"d{i:05d}",
                text=" ".join(tokens),
                lang="und",
                gold_label=label,
                source="synthetic",
            )
        )
    return documents
