"""Hot kernels for the four-point hyperbolicity scan.

The exhaustive scan is O(n^4) over ordered 4-tuples, the one place in the
package where plain numpy loops hurt. A numba-compiled kernel is used when
available; set VISUALMETRICS_DISABLE_NUMBA=1 to force the pure numpy path.
"""

import os

import numpy as np

_DISABLED = os.environ.get("VISUALMETRICS_DISABLE_NUMBA", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _delta_scan_numpy(dist):
    n = len(dist)
    delta = 0.0
    for o in range(n):
        prod = 0.5 * (dist[o][:, None] + dist[o][None, :] - dist)
        best = np.full((n, n), -np.inf)
        for z in range(n):
            np.maximum(best, np.minimum(prod[:, z, None], prod[None, z, :]), out=best)
        delta = max(delta, float(np.max(best - prod)))
    return delta


if HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _delta_scan_numba(dist):  # pragma: no cover - compiled
        n = dist.shape[0]
        delta = 0.0
        prod = np.empty((n, n))
        for o in range(n):
            for i in range(n):
                for j in range(n):
                    prod[i, j] = 0.5 * (dist[o, i] + dist[o, j] - dist[i, j])
            for x in range(n):
                for y in range(n):
                    best = -1e300
                    for z in range(n):
                        m = min(prod[x, z], prod[z, y])
                        if m > best:
                            best = m
                    gap = best - prod[x, y]
                    if gap > delta:
                        delta = gap
        return delta


def four_point_delta(dist):
    """Smallest delta in the four-point condition, over all base points."""
    dist = np.ascontiguousarray(dist, dtype=float)
    if HAVE_NUMBA:
        return float(_delta_scan_numba(dist))
    return float(_delta_scan_numpy(dist))
