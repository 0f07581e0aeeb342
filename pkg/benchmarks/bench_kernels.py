"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload with the best-of-N wall time of each backend
and the speedup.  Both backends are checked to agree before timing.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from bpl import _kernels_py, dicke

try:
    from bpl import _kernels
except ImportError:  # extension not built
    _kernels = None


def workloads():
    rng = np.random.default_rng(0)
    w, e0, p1, p2 = dicke._ybasis(24)
    alphas = rng.uniform(0, 2 * math.pi, (4096, 1)).repeat(48, axis=1)
    gammas = np.full(48, math.pi)
    yield "fig3-right point (n=24, L=48, 4096 nodes)", "layered_overlaps", (w, e0, p1, e0, alphas, gammas)

    w20, e20, p20, _ = dicke._ybasis(20)
    yield "grover sweep trace (n=20, L=4096)", "layered_trace", (w20, e20, p20, e20, 2 * math.pi / 20, math.pi, 4096)

    theta = rng.uniform(0, 2 * math.pi, (10_000, 48))
    yield "alternating sum (10^4 x L=48)", "alternating_sum", (theta, 16)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled kernels are not built; nothing to compare")
        return
    print(f"{'workload':<46} {'cython [ms]':>12} {'python [ms]':>12} {'speedup':>8}")
    for label, name, call_args in workloads():
        fast, slow = getattr(_kernels, name), getattr(_kernels_py, name)
        a, b = fast(*call_args), slow(*call_args)
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            assert np.allclose(x, y, atol=1e-10), f"{name}: backends disagree"
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{label:<46} {1e3 * t_fast:>12.2f} {1e3 * t_slow:>12.2f} {t_slow / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
