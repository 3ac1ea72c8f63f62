"""Compiled kernels vs. numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one row per (kernel, size) with the best-of-``repeat`` wall time of
each implementation, their speedup, and the largest relative difference.
"""
import argparse
import time

import numpy as np

from cursekit import _kernels_py
from cursekit._backend import COMPILED
from cursekit.pointsets import uniform01

try:
    from cursekit import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    for d, n in [(10, 50), (14, 100), (16, 200)]:
        masks = (uniform01(d, n) * (1 << d)).astype(np.uint64)
        yield ("subset_nonhit_sum", f"d={d} N={n}",
               lambda m, masks=masks, d=d: m.subset_nonhit_sum(masks, d, 0.8, 0.1, 0.1))
    for d, n, nt in [(3, 20, 100_000), (5, 50, 100_000), (8, 100, 50_000)]:
        nodes = uniform01(1, n * d).reshape(n, d)
        t = uniform01(2, nt * d).reshape(nt, d)
        for quadrant in (False, True):
            fam = "quadrant" if quadrant else "anchored"
            yield ("abs_local_discrepancy_power", f"{fam} d={d} N={n} T={nt}",
                   lambda m, nodes=nodes, t=t, quadrant=quadrant:
                   np.asarray(m.abs_local_discrepancy_power(nodes, t, 0.4, quadrant, 1.5)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':30s} {'case':32s} {'compiled_s':>11s} {'numpy_s':>11s} "
          f"{'speedup':>8s} {'max_rel_diff':>13s}")
    for name, label, fn in cases():
        tp, vp = best_time(lambda: fn(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:30s} {label:32s} {'-':>11s} {tp:11.4f} {'-':>8s} {'-':>13s}")
            continue
        tc, vc = best_time(lambda: fn(_kernels), args.repeat)
        rel = np.max(np.abs(np.asarray(vc) - np.asarray(vp)) / np.maximum(np.abs(vp), 1e-300))
        print(f"{name:30s} {label:32s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f} {rel:13.2e}")
    print(f"default backend: {'compiled' if COMPILED else 'numpy'}")


if __name__ == "__main__":
    main()
