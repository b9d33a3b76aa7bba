# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Levenshtein kernels: full distance and budget-banded check.

Semantics match ``_levenshtein_py`` exactly: unit-cost insert, delete and
substitute, no transpositions.
"""

from libc.stdlib cimport free, malloc


cdef Py_UCS4* _to_ucs4(str s, Py_ssize_t n) except NULL:
    cdef Py_UCS4* buf = <Py_UCS4*> malloc(n * sizeof(Py_UCS4))
    cdef Py_ssize_t k
    if buf == NULL:
        raise MemoryError()
    for k in range(n):
        buf[k] = s[k]
    return buf


def edit_distance(str x, str y):
    """Levenshtein distance between two strings."""
    cdef Py_ssize_t m = len(x), n = len(y)
    cdef str tmp
    if m == 0:
        return n
    if n == 0:
        return m
    if m < n:
        tmp = x; x = y; y = tmp
        m, n = n, m
    cdef Py_UCS4* xs = _to_ucs4(x, m)
    cdef Py_UCS4* ys = _to_ucs4(y, n)
    cdef int* prev = <int*> malloc((n + 1) * sizeof(int))
    cdef int* curr = <int*> malloc((n + 1) * sizeof(int))
    cdef int* swap
    cdef Py_ssize_t i, j
    cdef int cost, best, result
    if prev == NULL or curr == NULL:
        free(xs); free(ys); free(prev); free(curr)
        raise MemoryError()
    try:
        for j in range(n + 1):
            prev[j] = <int> j
        for i in range(1, m + 1):
            curr[0] = <int> i
            for j in range(1, n + 1):
                cost = 0 if xs[i - 1] == ys[j - 1] else 1
                best = prev[j - 1] + cost
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if curr[j - 1] + 1 < best:
                    best = curr[j - 1] + 1
                curr[j] = best
            swap = prev; prev = curr; curr = swap
        result = prev[n]
    finally:
        free(xs); free(ys); free(prev); free(curr)
    return result


def bounded_edit_distance(str x, str y, int budget):
    """Banded Levenshtein: the distance if it is <= budget, else budget + 1.

    Rows whose running minimum exceeds the budget abort early; cells outside
    the diagonal band of width 2*budget+1 are never inspected.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    cdef Py_ssize_t m = len(x), n = len(y)
    cdef int big = budget + 1
    if (m - n if m > n else n - m) > budget:
        return big
    if m == 0:
        return <int> n
    if n == 0:
        return <int> m
    cdef Py_UCS4* xs = _to_ucs4(x, m)
    cdef Py_UCS4* ys = _to_ucs4(y, n)
    cdef int* prev = <int*> malloc((n + 1) * sizeof(int))
    cdef int* curr = <int*> malloc((n + 1) * sizeof(int))
    cdef int* swap
    cdef Py_ssize_t i, j, lo, hi
    cdef int cost, best, row_min, result
    if prev == NULL or curr == NULL:
        free(xs); free(ys); free(prev); free(curr)
        raise MemoryError()
    try:
        for j in range(n + 1):
            prev[j] = <int> j if j <= budget else big
        result = -1
        for i in range(1, m + 1):
            lo = i - budget if i - budget > 1 else 1
            hi = i + budget if i + budget < n else n
            for j in range(n + 1):
                curr[j] = big
            if lo == 1 and i <= budget:
                curr[0] = <int> i
            row_min = curr[lo - 1]
            for j in range(lo, hi + 1):
                cost = 0 if xs[i - 1] == ys[j - 1] else 1
                best = prev[j - 1] + cost
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if curr[j - 1] + 1 < best:
                    best = curr[j - 1] + 1
                curr[j] = best if best < big else big
                if curr[j] < row_min:
                    row_min = curr[j]
            if row_min > budget:
                result = big
                break
            swap = prev; prev = curr; curr = swap
        if result < 0:
            result = prev[n] if prev[n] <= budget else big
    finally:
        free(xs); free(ys); free(prev); free(curr)
    return result
