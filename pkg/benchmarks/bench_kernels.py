"""Benchmark the four-point hyperbolicity scan: numba kernel vs numpy path.

The scan is O(n^4) and dominates the hyperbolicity scenario. Both code
paths live in visualmetrics._kernels; the numpy path is the fallback used
when numba is unavailable or VISUALMETRICS_DISABLE_NUMBA=1 is set.

Usage: python benchmarks/bench_kernels.py [--sizes 60,120,200] [--repeats 3]
"""

import argparse
import time

import numpy as np

from visualmetrics import _kernels


def random_metric(n, seed):
    """Random metric via shortest-path closure of a symmetric weight matrix."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.5, 2.0, (n, n))
    d = np.minimum(w, w.T)
    np.fill_diagonal(d, 0.0)
    for k in range(n):  # Floyd-Warshall closure
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return np.ascontiguousarray(d)


def time_fn(fn, dist, repeats):
    best = np.inf
    value = None
    for _ in range(repeats):
        start = time.perf_counter()
        value = fn(dist)
        best = min(best, time.perf_counter() - start)
    return value, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="60,120,200",
                        help="comma-separated sample sizes")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; benchmarking numpy path only")

    print(f"{'n':>6} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for n in sizes:
        dist = random_metric(n, seed=n)
        value_np, t_np = time_fn(_kernels._delta_scan_numpy, dist,
                                 args.repeats)
        if _kernels.HAVE_NUMBA:
            _kernels._delta_scan_numba(dist[:8, :8].copy())  # warm the JIT
            value_nb, t_nb = time_fn(_kernels._delta_scan_numba, dist,
                                     args.repeats)
            if abs(value_np - value_nb) > 1e-9:
                raise SystemExit(
                    f"kernel disagreement at n={n}: {value_np} vs {value_nb}"
                )
            print(f"{n:>6} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{n:>6} {t_np:>12.4f} {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
