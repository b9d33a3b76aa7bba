"""Benchmark the compiled Levenshtein kernel against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import random
import string
import time

from crisisal._kernels import _levenshtein_py as py_impl

try:
    from crisisal._kernels import _levenshtein as cy_impl  # type: ignore[attr-defined]
except ImportError:
    cy_impl = None


def make_pairs(n: int, seed: int = 0) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "äöüéñ"
    def word() -> str:
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(4, 16)))
    return [(word(), word()) for _ in range(n)]


def bench(label: str, fn, pairs, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for x, y in pairs:
            fn(x, y)
        best = min(best, time.perf_counter() - t0)
    rate = len(pairs) / best
    print(f"{label:<40} {best * 1e3:9.1f} ms   {rate:12,.0f} pairs/s")
    return best


def bench_bounded(label: str, fn, pairs, budget: int, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for x, y in pairs:
            fn(x, y, budget)
        best = min(best, time.perf_counter() - t0)
    rate = len(pairs) / best
    print(f"{label:<40} {best * 1e3:9.1f} ms   {rate:12,.0f} pairs/s")
    return best


def main() -> None:
    pairs = make_pairs(20000)
    print(f"{len(pairs)} random word pairs, lengths 4-16\n")

    t_py = bench("edit_distance (python)", py_impl.edit_distance, pairs)
    if cy_impl is not None:
        t_cy = bench("edit_distance (cython)", cy_impl.edit_distance, pairs)
        print(f"{'':40} speedup: {t_py / t_cy:.1f}x\n")
    else:
        print(f"{'':40} compiled kernel unavailable\n")

    t_py = bench_bounded("bounded_edit_distance<=2 (python)", py_impl.bounded_edit_distance, pairs, 2)
    if cy_impl is not None:
        t_cy = bench_bounded("bounded_edit_distance<=2 (cython)", cy_impl.bounded_edit_distance, pairs, 2)
        print(f"{'':40} speedup: {t_py / t_cy:.1f}x")


if __name__ == "__main__":
    main()
