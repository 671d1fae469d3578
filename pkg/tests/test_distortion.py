import numpy as np
import pytest

from visualmetrics.distortion import (
    SampledMap,
    bilipschitz_audit,
    chain_distortion_bound,
    pointwise_distortion,
)
from visualmetrics.errors import InsufficientSamples, NotComposable


def _euclid(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


# dyadic shells matching _planar_map's sampling radii
_SCHEDULE = [1.0 * 2.0**-j for j in range(4)]


def _planar_map(mapping, rng, count=400, r0=1.0, annuli=4):
    focal = np.zeros(2)
    sources = [focal]
    images = [mapping(focal)]
    for j in range(annuli):
        r = r0 * 2.0**-j
        for _ in range(count // annuli):
            rho = r * rng.uniform(0.55, 1.0)
            phi = rng.uniform(0, 2 * np.pi)
            s = rho * np.array([np.cos(phi), np.sin(phi)])
            sources.append(s)
            images.append(mapping(s))
    return SampledMap(
        sources=tuple(sources),
        images=tuple(images),
        source_metric=_euclid,
        target_metric=_euclid,
    )


class TestPointwiseDistortion:
    def test_isometry_has_unit_bracket(self, rng):
        sampled = _planar_map(lambda p: p + np.array([3.0, -1.0]), rng)
        report = pointwise_distortion(sampled, schedule=_SCHEDULE, n_min=20)
        low, high = report.bracket
        assert low == pytest.approx(1.0, abs=1e-9)
        assert high == pytest.approx(1.0, abs=1e-9)

    def test_anisotropic_stretch_has_known_distortion(self, rng):
        # oracle: (x, y) -> (2x, y) has sup ratio 2, inf ratio 1, H* = 2
        sampled = _planar_map(lambda p: np.array([2 * p[0], p[1]]), rng)
        report = pointwise_distortion(sampled, schedule=_SCHEDULE, n_min=20)
        assert report.H_star == pytest.approx(2.0, rel=0.05)
        assert report.L == pytest.approx(2.0, rel=0.05)
        assert report.l == pytest.approx(1.0, rel=0.05)

    def test_conformal_scaling_is_not_distortion(self, rng):
        # a pure dilation scales L and l together and keeps H* at 1
        sampled = _planar_map(lambda p: 5.0 * p, rng)
        report = pointwise_distortion(sampled, schedule=_SCHEDULE, n_min=20)
        assert report.H_star == pytest.approx(1.0, abs=1e-9)
        assert report.L == pytest.approx(5.0, abs=1e-9)

    def test_sparse_annulus_raises(self, rng):
        sampled = _planar_map(lambda p: p, rng, count=40)
        with pytest.raises(InsufficientSamples):
            pointwise_distortion(sampled, schedule=_SCHEDULE, n_min=30)

    def test_report_serializes_with_exact_fields(self, rng):
        sampled = _planar_map(lambda p: p, rng)
        report = pointwise_distortion(sampled, schedule=_SCHEDULE, n_min=20)
        payload = report.to_json()
        for key in ("focal", "radii", "sup_ratio", "inf_ratio", "L", "l",
                    "H_star", "bracket"):
            assert key in payload


class TestChainBound:
    def test_product_bounds_composite(self, rng):
        first = _planar_map(lambda p: np.array([2 * p[0], p[1]]), rng)
        rng2 = np.random.default_rng(1)
        second = _planar_map(lambda p: np.array([p[0], 3 * p[1]]), rng2)
        r1 = pointwise_distortion(first, schedule=_SCHEDULE, n_min=20)
        r2 = pointwise_distortion(second, schedule=_SCHEDULE, n_min=20)
        bound = chain_distortion_bound([r1, r2])
        assert bound >= r1.H_star - 1e-9
        assert bound == pytest.approx(r1.H_star * r2.H_star, rel=1e-9)

    def test_non_composable_chain_is_rejected(self, rng):
        first = _planar_map(lambda p: p + np.array([1.0, 0.0]), rng)
        second = _planar_map(lambda p: p, rng)  # focal does not line up
        r1 = pointwise_distortion(first, schedule=_SCHEDULE, n_min=20)
        r2 = pointwise_distortion(second, schedule=_SCHEDULE, n_min=20)
        with pytest.raises(NotComposable):
            chain_distortion_bound([r1, r2])


class TestBilipschitzAudit:
    def test_identity_audits_to_one(self, rng):
        sampled = _planar_map(lambda p: p, rng)
        assert bilipschitz_audit(sampled, seed=0) == pytest.approx(1.0, abs=1e-12)

    def test_doubling_map_audits_to_two(self, rng):
        sampled = _planar_map(lambda p: 2.0 * p, rng)
        assert bilipschitz_audit(sampled, seed=0) == pytest.approx(2.0, abs=1e-12)

    def test_contraction_audits_reciprocally(self, rng):
        sampled = _planar_map(lambda p: 0.5 * p, rng)
        assert bilipschitz_audit(sampled, seed=0) == pytest.approx(2.0, abs=1e-12)

    def test_too_few_pairs_raise(self, rng):
        sampled = _planar_map(lambda p: p, rng, count=4, annuli=1)
        with pytest.raises(InsufficientSamples):
            bilipschitz_audit(sampled, min_pairs=1000, seed=0)
