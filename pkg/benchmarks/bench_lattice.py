#!/usr/bin/env python3
"""Benchmark the compiled lattice core against the pure-Python fallback.

Workload: diagonal-dominant normalized confusion matrices with planted alias
blocks and scattered noise (the shape real cross-validation output has), at
growing avatar counts.  Both backends must return identical concept lists;
the benchmark asserts that before timing.

Usage:
    python benchmarks/bench_lattice.py
    python benchmarks/bench_lattice.py --sizes 50 100 200 400 --repeats 5
"""

import argparse
import time

from aliasmine import _lattice_py
from aliasmine.synthetic import alias_confusion_matrix

try:
    from aliasmine import _lattice_cy
except ImportError:
    _lattice_cy = None


def time_backend(fn, rows, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(rows)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[50, 100, 200, 300]
    )
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument(
        "--noise", type=float, default=0.2, help="stray misclassification level"
    )
    args = parser.parse_args()

    if _lattice_cy is None:
        print("compiled core not built; timing the pure-Python backend only")

    header = f"{'n':>5} {'concepts':>9} {'python_ms':>10}"
    if _lattice_cy is not None:
        header += f" {'compiled_ms':>12} {'speedup':>8}"
    print(header)
    for n in args.sizes:
        m = alias_confusion_matrix(
            n_avatars=n, n_alias_pairs=n // 10, seed=n, noise_level=args.noise
        )
        rows = [tuple(r) for r in m.rows.tolist()]
        got_py = _lattice_py.enumerate_closed(rows)
        line = f"{n:>5} {len(got_py):>9}"
        py_s = time_backend(_lattice_py.enumerate_closed, rows, args.repeats)
        line += f" {py_s * 1e3:>10.1f}"
        if _lattice_cy is not None:
            got_cy = _lattice_cy.enumerate_closed(rows)
            assert got_cy == got_py, f"backend mismatch at n={n}"
            cy_s = time_backend(_lattice_cy.enumerate_closed, rows, args.repeats)
            line += f" {cy_s * 1e3:>12.1f} {py_s / cy_s:>7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
