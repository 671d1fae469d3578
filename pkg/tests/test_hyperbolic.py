import numpy as np
import pytest

from visualmetrics.errors import NonConvergentSequence
from visualmetrics.hyperbolic import (
    ConSpace,
    FillingPoint,
    FiniteMetricSample,
    bourdon_boundary_value,
    bourdon_closed_form_g,
    con_closed_form,
    con_filling_distance,
    delta_hyperbolicity,
    filling_metric_g,
    gromov_product,
)


def _star_tree(leaves, arm=1.0):
    # leaves at distance `arm` from a common hub: an exact 0-hyperbolic space
    n = leaves + 1
    dist = np.full((n, n), 2.0 * arm)
    dist[0, :] = arm
    dist[:, 0] = arm
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSample(tuple(range(n)), dist)


def _unit_square_space(s=1.0):
    def euclid(a, b):
        return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))

    return ConSpace(d1=euclid, diameter=np.sqrt(2.0))


class TestGromovProducts:
    def test_product_matches_definition(self):
        sample = _star_tree(4)
        x, y, o = 1, 2, 0
        expected = 0.5 * (
            sample.distance(x, o) + sample.distance(y, o) - sample.distance(x, y)
        )
        assert gromov_product(sample, x, y, o) == expected

    def test_star_tree_is_zero_hyperbolic(self):
        delta, _ = delta_hyperbolicity(_star_tree(10))
        assert delta == pytest.approx(0.0, abs=1e-12)

    def test_four_point_square_has_known_delta(self):
        # hand-computed oracle: for the vertices of a unit square, base at
        # one corner, the two adjacent corners x, y have product 1 - s/2
        # with s = sqrt(2), the opposite corner z has products s/2 with
        # both, and the defect is s/2 - (1 - s/2) = sqrt(2) - 1
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        dist = np.linalg.norm(corners[:, None] - corners[None, :], axis=-1)
        sample = FiniteMetricSample((0, 1, 2, 3), dist)
        assert delta_hyperbolicity(sample)[0] == pytest.approx(
            np.sqrt(2) - 1.0, abs=1e-12
        )


class TestConFilling:
    def test_distance_formula(self):
        space = _unit_square_space()
        a = FillingPoint(np.array([0.0, 0.0]), 0.2)
        b = FillingPoint(np.array([0.3, 0.4]), 0.1)
        expected = 2 * np.log((0.5 + 0.2) / np.sqrt(0.02))
        assert con_filling_distance(space, a, b) == pytest.approx(
            expected, abs=1e-12
        )

    def test_sequence_limit_matches_closed_form(self):
        space = _unit_square_space()
        o = FillingPoint(np.array([0.5, 0.5]), 0.5)
        x, y = np.array([0.1, 0.2]), np.array([0.9, 0.4])
        heights = [0.05 * 2.0**-k for k in range(10)]

        def fill(a, b):
            def as_point(obj):
                if isinstance(obj, tuple):
                    return FillingPoint(np.asarray(obj[0]), obj[1])
                return obj

            return con_filling_distance(space, as_point(a), as_point(b))

        value = bourdon_boundary_value(fill, o, x, y, heights, tol=1e-6)
        target = con_closed_form(space, o, x, y)
        assert value.value == pytest.approx(target, abs=1e-6)

    def test_closed_form_ratio_at_the_base_projection(self):
        # at x = z the conformal factor s * d1 / ((d1+s)(d1+s)) / d1
        # evaluates to s / s^2 = 1/s; with s = 0.5 the factor is 2.0
        def line_metric(a, b):
            return abs(float(a) - float(b))

        space = ConSpace(d1=line_metric, diameter=1.0)
        s = 0.5
        o = FillingPoint(0.0, s)
        x, y = 0.0, 1e-9
        ratio = con_closed_form(space, o, x, y) / line_metric(x, y)
        assert ratio == pytest.approx(2.0, rel=1e-6)

    def test_nonconvergent_heights_raise(self):
        space = _unit_square_space()
        o = FillingPoint(np.array([0.5, 0.5]), 0.5)

        def noisy_fill(a, b):
            def as_point(obj):
                if isinstance(obj, tuple):
                    return FillingPoint(np.asarray(obj[0]), obj[1])
                return obj

            value = con_filling_distance(space, as_point(a), as_point(b))
            return value * (1.0 + 0.05 * np.sin(1e4 * value))

        with pytest.raises(NonConvergentSequence):
            bourdon_boundary_value(
                noisy_fill,
                o,
                np.array([0.1, 0.2]),
                np.array([0.9, 0.4]),
                [0.05 * 2.0**-k for k in range(10)],
                tol=1e-8,
            )


class TestSphereFilling:
    def test_filling_metric_matches_formula(self, ball, estimator):
        p = np.array([1.0 + 0j, 0j])
        q = np.array([np.cos(0.4) + 0j, np.sin(0.4) + 0j])
        h1, h2 = 0.2, 0.1
        x = (1 - h1**2) * p
        y = (1 - h2**2) * q
        d = estimator.distance(p, q)
        expected = 2 * np.log((d + max(h1, h2)) / np.sqrt(h1 * h2))
        assert filling_metric_g(ball, estimator.distance, x, y) == pytest.approx(
            expected, rel=1e-6
        )

    def test_visual_function_is_a_quasi_distance(self, ball, estimator, rng):
        # the visual function may fail the triangle inequality, but only
        # up to a bounded multiplicative defect
        from visualmetrics.carnot import sample_boundary

        pts = sample_boundary(ball, 10, 29)
        o = 0.84 * np.array([0.2 + 0.3j, 0.5 - 0.4j])
        o = o / np.linalg.norm(o) * 0.84
        values = {}
        for i in range(10):
            for j in range(10):
                if i != j:
                    values[i, j] = bourdon_closed_form_g(
                        ball, estimator.distance, o, pts[i], pts[j]
                    )
        tau = 0.0
        for i in range(10):
            for j in range(10):
                for k in range(10):
                    if len({i, j, k}) == 3:
                        tau = max(
                            tau,
                            values[i, k]
                            / (values[i, j] + values[j, k]),
                        )
        assert tau < 4.0
