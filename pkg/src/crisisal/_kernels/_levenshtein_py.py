"""Pure-Python Levenshtein kernels; fallback when the extension is absent.

Semantics are identical to the compiled module: unit-cost insert, delete
and substitute, no transpositions.
"""

from __future__ import annotations


def edit_distance(x: str, y: str) -> int:
    """Levenshtein distance between two strings."""
    m, n = len(x), len(y)
    if m == 0:
        return n
    if n == 0:
        return m
    if m < n:  # iterate over the longer string, row over the shorter
        x, y, m, n = y, x, n, m
    prev = list(range(n + 1))
    curr = [0] * (n + 1)
    for i in range(1, m + 1):
        curr[0] = i
        xc = x[i - 1]
        for j in range(1, n + 1):
            cost = 0 if xc == y[j - 1] else 1
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
        prev, curr = curr, prev
    return prev[n]


def bounded_edit_distance(x: str, y: str, budget: int) -> int:
    """Banded Levenshtein: the distance if it is <= budget, else budget + 1.

    Rows whose running minimum exceeds the budget abort early; cells outside
    the diagonal band of width 2*budget+1 are never computed.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    m, n = len(x), len(y)
    if abs(m - n) > budget:
        return budget + 1
    if m == 0:
        return n
    if n == 0:
        return m
    big = budget + 1
    prev = [j if j <= budget else big for j in range(n + 1)]
    curr = [big] * (n + 1)
    for i in range(1, m + 1):
        lo = max(1, i - budget)
        hi = min(n, i + budget)
        curr[lo - 1] = i if (lo == 1 and i <= budget) else big
        row_min = curr[lo - 1]
        xc = x[i - 1]
        for j in range(lo, hi + 1):
            cost = 0 if xc == y[j - 1] else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if curr[j - 1] + 1 < best:
                best = curr[j - 1] + 1
            curr[j] = best if best < big else big
            if curr[j] < row_min:
                row_min = curr[j]
        if row_min > budget:
            return big
        prev, curr = curr, [big] * (n + 1)
    return prev[n] if prev[n] <= budget else big
