"""Shared text segmentation helpers."""

from __future__ import annotations

import re

# Maximal runs of Unicode letters/digits; underscores and punctuation split.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase Unicode word segmentation."""
    return _TOKEN_RE.findall(text.casefold())
