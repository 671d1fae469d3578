"""Closed-form invariant distance on the unit ball.

The Kobayashi distance of the unit ball in C^n is arctanh |phi_x(y)| where
phi_x is the Moebius automorphism exchanging x and the origin.  This is the
independent ground truth used to audit the model Finsler metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInDomain


def _herm(a, b):
    return np.sum(np.asarray(a, dtype=complex) * np.conj(b), axis=-1)


def mobius_map(center):
    """Automorphism of the unit ball sending ``center`` to the origin.

    Returns a callable acting on (..., n) complex arrays.  The involution
    property phi(center) = 0, phi(0) = center holds.
    """
    a = np.asarray(center, dtype=complex)
    a2 = float(np.real(_herm(a, a)))
    if a2 >= 1:
        raise NotInDomain("Moebius center must lie in the open ball")
    if a2 == 0:
        return lambda z: -np.asarray(z, dtype=complex)
    s = np.sqrt(1 - a2)

    def apply(z):
        z = np.asarray(z, dtype=complex)
        za = _herm(z, a)
        proj = (za / a2)[..., None] * a
        orth = z - proj
        return (a - proj - s * orth) / (1 - za[..., None])

    return apply


@dataclass
class BallOracle:
    """Exact Kobayashi geometry of the unit ball in C^n."""

    n: int = 2

    def _check(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.linalg.norm(z, axis=-1) >= 1):
            raise NotInDomain("oracle points must lie in the open unit ball")
        return z

    def distance(self, x, y):
        """arctanh of the Moebius-invariant gauge between two points."""
        x = self._check(x)
        y = self._check(y)
        return float(np.arctanh(self._gauge(x, y)))

    def distance_matrix(self, points):
        pts = self._check(points)
        gauge = self._gauge(pts[:, None, :], pts[None, :, :])
        gauge = 0.5 * (gauge + gauge.T)   # exact symmetry despite roundoff
        np.fill_diagonal(gauge, 0.0)
        return np.arctanh(gauge)

    def pairwise_distance(self, xs, ys):
        """Elementwise distances between two batches of points."""
        return np.arctanh(self._gauge(self._check(xs), self._check(ys)))

    def _gauge(self, x, y):
        # |phi_x(y)| from the standard identity
        # 1 - |phi_x(y)|^2 = (1-|x|^2)(1-|y|^2)/|1 - <y,x>|^2
        x2 = np.real(_herm(x, x))
        y2 = np.real(_herm(y, y))
        cross = np.abs(1 - _herm(y, x)) ** 2
        val = 1 - (1 - x2) * (1 - y2) / cross
        return np.sqrt(np.clip(val, 0.0, 1.0))

    def infinitesimal_norm(self, x, vector):
        """Exact Kobayashi Finsler norm at x applied to a tangent vector."""
        x = self._check(x)
        v = np.asarray(vector, dtype=complex)
        x2 = np.real(_herm(x, x))
        num = np.real(_herm(v, v)) * (1 - x2) + np.abs(_herm(v, x)) ** 2
        return np.sqrt(num) / (1 - x2)
