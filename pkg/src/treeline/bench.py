"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python -m treeline.bench [--L 7] [--qi-L 6] [--repeat 3]

Both paths compute identical exact integers; this only measures time.
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

from . import kernels
from .actions import PRESETS
from .boundary_map import _orbit_tables
from .starcheck import check_condition_star


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--L", type=int, default=7, help="ball radius for the scan")
    parser.add_argument("--qi-L", type=int, default=6, help="ball radius for pair tables")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    dot, star = PRESETS["dot"], PRESETS["star"]
    backends = ["numpy"] + (["numba"] if kernels._HAS_NUMBA else [])
    results: dict[str, dict[str, float]] = {}
    reference = None
    for name in backends:
        kernels.set_backend(name)

        def scan():
            return check_condition_star(
                dot, star, Fraction(1), Fraction(1), args.L, witness_cap=0
            )

        def tables():
            return _orbit_tables(dot, star, args.qi_L)

        if name == "numba":  # compile outside the timer
            scan()
            tables()
        verdict = scan()
        if reference is None:
            reference = (verdict.minimal_M_sq, verdict.total_violations)
        else:
            assert reference == (verdict.minimal_M_sq, verdict.total_violations), \
                "backends disagree"
        results[name] = {
            "ball_scan": _time(scan, args.repeat),
            "pair_tables": _time(tables, args.repeat),
        }

    print(f"ball scan L={args.L}, pair tables L={args.qi_L} "
          f"(best of {args.repeat}; identical exact outputs)")
    print(f"{'backend':<8} {'ball_scan':>12} {'pair_tables':>12}")
    for name, row in results.items():
        print(f"{name:<8} {row['ball_scan']:>11.3f}s {row['pair_tables']:>11.3f}s")
    if len(results) == 2:
        for key in ("ball_scan", "pair_tables"):
            speedup = results["numpy"][key] / results["numba"][key]
            print(f"numba speedup on {key}: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
