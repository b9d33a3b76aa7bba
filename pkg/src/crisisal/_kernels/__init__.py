"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CRISISAL_PURE_PYTHON=1 to force the fallback (useful for benchmarking
and for debugging the kernels against each other).
"""

import os

if os.environ.get("CRISISAL_PURE_PYTHON") == "1":
    from . import _levenshtein_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _levenshtein as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _levenshtein_py as _impl

        BACKEND = "python"

edit_distance = _impl.edit_distance
bounded_edit_distance = _impl.bounded_edit_distance

__all__ = ["edit_distance", "bounded_edit_distance", "BACKEND"]
