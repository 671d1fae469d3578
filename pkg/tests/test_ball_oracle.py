import numpy as np
import pytest

from visualmetrics.ball_oracle import BallOracle, mobius_map


def _interior_points(rng, count, n=2):
    z = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    radii = rng.uniform(0.05, 0.97, size=count)
    return z / np.linalg.norm(z, axis=1, keepdims=True) * radii[:, None]


class TestDistance:
    def test_radial_value_is_inverse_hyperbolic_tangent(self, oracle):
        # frozen closed form: d(0, r e1) = artanh(r); at r = 1/2 this is
        # log(3)/2 = 0.5493061443340549
        x = np.zeros(2, dtype=complex)
        y = np.array([0.5 + 0j, 0j])
        assert oracle.distance(x, y) == pytest.approx(
            0.5493061443340549, abs=1e-12
        )

    def test_fiber_distance_is_log_height_ratio(self, oracle):
        # points on one normal ray at depths h1^2, h2^2 approach distance
        # log(h1/h2) as the heights shrink (corrections are O(h^2))
        p = np.array([1.0 + 0j, 0j])
        ratio = 6.0
        for h2, tol in [(0.05, 5e-2), (0.005, 5e-4), (5e-4, 5e-6)]:
            h1 = ratio * h2
            x = (1 - h1**2) * p
            y = (1 - h2**2) * p
            assert oracle.distance(x, y) == pytest.approx(
                np.log(ratio), abs=tol
            )

    def test_triangle_inequality_on_random_triples(self, oracle, rng):
        pts = _interior_points(rng, 300)
        for _ in range(500):
            i, j, k = rng.choice(300, size=3, replace=False)
            dij = oracle.distance(pts[i], pts[j])
            djk = oracle.distance(pts[j], pts[k])
            dik = oracle.distance(pts[i], pts[k])
            assert dik <= dij + djk + 1e-12

    def test_unitary_invariance(self, oracle, rng):
        theta = 0.9
        u = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        pts = _interior_points(rng, 100)
        for _ in range(200):
            i, j = rng.choice(100, size=2, replace=False)
            d = oracle.distance(pts[i], pts[j])
            du = oracle.distance(u @ pts[i], u @ pts[j])
            assert d == pytest.approx(du, abs=1e-12)

    def test_distance_matrix_is_symmetric_with_zero_diagonal(self, oracle, rng):
        pts = _interior_points(rng, 40)
        mat = oracle.distance_matrix(pts)
        assert np.array_equal(mat, mat.T)
        assert np.all(np.diag(mat) == 0.0)


class TestMobius:
    def test_mobius_is_an_isometry(self, oracle, rng):
        phi = mobius_map(np.array([0.5 + 0j, 0j]))
        pts = _interior_points(rng, 60)
        for _ in range(100):
            i, j = rng.choice(60, size=2, replace=False)
            d = oracle.distance(pts[i], pts[j])
            dm = oracle.distance(phi(pts[i]), phi(pts[j]))
            assert d == pytest.approx(dm, abs=1e-9)

    def test_mobius_swaps_center_and_origin(self):
        center = np.array([0.5 + 0j, 0j])
        phi = mobius_map(center)
        assert np.allclose(phi(center), 0.0, atol=1e-12)
        assert np.allclose(phi(np.zeros(2, dtype=complex)), center, atol=1e-12)


class TestInfinitesimalNorm:
    def test_norm_matches_finite_difference_of_distance(self, oracle):
        x = np.array([0.3 + 0.1j, -0.2 + 0.4j])
        v = np.array([0.2 - 0.1j, 0.5 + 0.3j])
        t = 1e-6
        fd = oracle.distance(x, x + t * v) / t
        # arccosh near 1 halves the usable float precision of the quotient
        assert oracle.infinitesimal_norm(x, v) == pytest.approx(fd, rel=1e-3)
