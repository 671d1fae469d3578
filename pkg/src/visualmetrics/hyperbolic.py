"""Gromov products, hyperbolicity, hyperbolic fillings, and visual functions.

Covers the filling metric g on the domain side, the abstract filling
Con(Z) = Z x (0, D) over a bounded metric space, Bourdon visual functions
rho_o = exp(-<.,.>_o) with their closed forms, and conformal-ratio limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import four_point_delta
from .domains import height, project_to_boundary
from .errors import (
    DirectionalMismatch,
    HeightOutOfRange,
    NonConvergentSequence,
    TooFewPoints,
)


@dataclass(frozen=True)
class FiniteMetricSample:
    """Immutable finite (quasi-)metric space given by its distance matrix."""

    labels: tuple
    matrix: np.ndarray
    base: int | None = None
    triangle_slack: float = field(init=False, default=0.0)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        if len(self.labels) != m.shape[0]:
            raise ValueError("label count does not match matrix size")
        if np.any(m < 0) or np.any(np.diag(m) != 0) or not np.array_equal(m, m.T):
            raise ValueError("matrix must be symmetric, nonnegative, zero-diagonal")
        object.__setattr__(self, "matrix", m)
        # worst additive triangle defect; quasi-distances are allowed but
        # the defect is recorded rather than silently accepted
        slack = float(max(0.0, np.max(m[:, None, :] - m[:, :, None] - m[None, :, :])))
        object.__setattr__(self, "triangle_slack", slack)

    def __len__(self):
        return len(self.labels)

    def distance(self, i, j):
        return float(self.matrix[i, j])

    @staticmethod
    def from_points(points, metric, base=None, labels=None):
        points = list(points)
        n = len(points)
        m = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                m[i, j] = m[j, i] = metric(points[i], points[j])
        return FiniteMetricSample(
            tuple(labels if labels is not None else range(n)), m, base
        )

    @staticmethod
    def load(path):
        """Text format: 'n [base]' then n whitespace-separated matrix rows."""
        with open(path) as fh:
            head = fh.readline().split()
            n = int(head[0])
            base = int(head[1]) if len(head) > 1 else None
            rows = [[float(v) for v in fh.readline().split()] for _ in range(n)]
        return FiniteMetricSample(tuple(range(n)), np.array(rows), base)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"{len(self)}" + (f" {self.base}" if self.base is not None else "") + "\n")
            for row in self.matrix:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def gromov_product(sample, x, y, o):
    """(x|y)_o = half of d(x,o) + d(y,o) - d(x,y)."""
    m = sample.matrix
    return 0.5 * float(m[x, o] + m[y, o] - m[x, y])


def gromov_matrix(sample, o):
    m = sample.matrix
    return 0.5 * (m[o][:, None] + m[o][None, :] - m)


def delta_hyperbolicity(sample, max_exhaustive=400, seed=0):
    """Smallest delta in the four-point condition over ordered 4-tuples.

    Exhaustive for small samples; above ``max_exhaustive`` points a random
    subsample is scanned and the scanned size returned alongside.
    """
    n = len(sample)
    if n < 4:
        raise TooFewPoints("need at least 4 points")
    matrix = sample.matrix
    scanned = n
    if n > max_exhaustive:
        idx = np.random.default_rng(seed).choice(n, size=max_exhaustive, replace=False)
        matrix = matrix[np.ix_(idx, idx)]
        scanned = max_exhaustive
    return four_point_delta(matrix), scanned


# -- the hyperbolic filling metric on the domain -------------------------


def filling_metric_g(domain, cc, x, y):
    """g(x, y) = 2 log((d_CC(pi x, pi y) + max h) / sqrt(h(x) h(y)))."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    hx = height(domain, x)
    hy = height(domain, y)
    if np.allclose(x, y, atol=1e-15):
        return 0.0
    px = project_to_boundary(domain, x)
    py = project_to_boundary(domain, y)
    d = 0.0 if np.allclose(px, py, atol=1e-12) else float(cc(px, py))
    return 2.0 * float(np.log((d + max(hx, hy)) / np.sqrt(hx * hy)))


# -- the abstract filling Con(Z) -----------------------------------------


@dataclass(frozen=True)
class FillingPoint:
    """Point of Con(Z): a base coordinate in Z plus a height."""

    base: object
    height: float


@dataclass(frozen=True)
class ConSpace:
    """Con(Z) = Z x (0, D) over a bounded metric space (Z, d1)."""

    d1: object           # callable (x, y) -> distance in Z
    diameter: float      # D, an upper bound for diam(Z)

    def check(self, point):
        if not 0.0 < point.height < self.diameter:
            raise HeightOutOfRange(
                f"height {point.height} outside (0, {self.diameter})"
            )

    def distance(self, a, b):
        return con_filling_distance(self, a, b)


def con_filling_distance(space, a, b):
    """d2((x,u), (y,v)) = 2 log((d1(x,y) + max(u,v)) / sqrt(uv))."""
    space.check(a)
    space.check(b)
    d = float(space.d1(a.base, b.base))
    if d == 0.0 and a.height == b.height:
        return 0.0
    return 2.0 * float(
        np.log((d + max(a.height, b.height)) / np.sqrt(a.height * b.height))
    )


# -- Bourdon visual functions --------------------------------------------


@dataclass(frozen=True)
class BourdonValue:
    pair: tuple
    value: float
    base: object
    method: str   # "sequence-limit" or "closed-form"


def bourdon_boundary_value(fill, o, p, q, heights, tol=1e-6, order=1):
    """Bourdon function by diagonal equal-height sequences.

    ``fill(a, b)`` must accept the base object ``o`` and ``(point, height)``
    pairs. Values exp(-<(p,h),(q,h)>_o) are extrapolated assuming an
    error of the given order in h (heights halving), and the extrapolants
    must settle within ``tol``.
    """
    heights = list(heights)
    if any(b >= a for a, b in zip(heights, heights[1:])):
        raise ValueError("heights must be strictly decreasing")
    values = []
    for h in heights:
        a, b = (p, h), (q, h)
        product = 0.5 * (fill(a, o) + fill(b, o) - fill(a, b))
        values.append(float(np.exp(-product)))
    weight = 2.0**order
    extrapolated = [
        (weight * v1 - v0) / (weight - 1.0)
        for v0, v1 in zip(values, values[1:])
    ]
    if len(extrapolated) >= 2 and abs(extrapolated[-1] - extrapolated[-2]) > tol:
        raise NonConvergentSequence(
            f"extrapolants differ by {abs(extrapolated[-1] - extrapolated[-2]):.3g}"
        )
    limit = extrapolated[-1] if extrapolated else values[-1]
    return BourdonValue((p, q), max(limit, 0.0), o, "sequence-limit")


def bourdon_closed_form_g(domain, cc, o, p, q):
    """Closed form of the Bourdon function of the filling metric g."""
    o = np.asarray(o, dtype=complex)
    ho = height(domain, o)
    po = project_to_boundary(domain, o)
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if np.allclose(p, q, atol=1e-14):
        return 0.0
    dpq = float(cc(p, q))
    dpo = 0.0 if np.allclose(p, po, atol=1e-12) else float(cc(p, po))
    dqo = 0.0 if np.allclose(q, po, atol=1e-12) else float(cc(q, po))
    return dpq * ho / ((dpo + ho) * (dqo + ho))


def con_closed_form(space, o, x, y):
    """Closed form of the Bourdon function on Con(Z) based at o = (z, s)."""
    space.check(o)
    s = o.height
    z = o.base
    d = float(space.d1(x, y))
    return s * d / ((float(space.d1(x, z)) + s) * (float(space.d1(y, z)) + s))


def conformal_ratio_limit(
    metric1, metric2, p, radii, approach, directions=4, spread_tol=0.01
):
    """Limit of metric2(p,q)/metric1(p,q) as q -> p along sampled directions.

    ``approach(p, r, j)`` supplies a point at parameter r in direction j.
    Per-direction ratio sequences are extrapolated linearly in r; a relative
    spread beyond ``spread_tol`` across directions means the two metrics are
    not conformal at p.
    """
    radii = list(radii)
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    limits = []
    for j in range(directions):
        ratios = []
        for r in radii:
            q = approach(p, r, j)
            d1 = float(metric1(p, q))
            d2 = float(metric2(p, q))
            if not np.isfinite(d1) or d1 <= 0 or not np.isfinite(d2):
                raise NonConvergentSequence(f"degenerate pair at r={r}")
            ratios.append(d2 / d1)
        if len(ratios) >= 2:
            # halving radii; first-order extrapolation
            limits.append(2.0 * ratios[-1] - ratios[-2])
        else:
            limits.append(ratios[-1])
    center = float(np.mean(limits))
    if center == 0:
        raise NonConvergentSequence("vanishing ratio limit")
    spread = (max(limits) - min(limits)) / abs(center)
    if spread > spread_tol:
        raise DirectionalMismatch(
            f"directional spread {spread:.3g} exceeds {spread_tol}"
        )
    return center
