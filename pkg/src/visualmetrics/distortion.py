"""Pointwise metric distortion of sampled homeomorphisms.

Measures L_F(x) = limsup and l_F(x) = liminf of image/source distance
ratios as the radius shrinks; their quotient H*(x) is the distortion. All
limits are estimated by annulus extremes plus extrapolation, and reported
as brackets rather than point values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, NotComposable


@dataclass(frozen=True)
class SampledMap:
    """Finite sample of a homeomorphism with metrics on both sides."""

    sources: tuple
    images: tuple
    source_metric: object     # callable (a, b) -> distance
    target_metric: object
    focal_index: int = 0

    def __post_init__(self):
        if len(self.sources) != len(self.images):
            raise ValueError("source/image samples must pair up")
        if not 0 <= self.focal_index < len(self.sources):
            raise ValueError("focal point must be in the sample")

    @property
    def focal(self):
        return self.sources[self.focal_index]

    @property
    def focal_image(self):
        return self.images[self.focal_index]


@dataclass
class DistortionReport:
    focal: object
    focal_image: object
    radii: list
    sup_ratio: list
    inf_ratio: list
    L: float
    l: float
    H_star: float
    bracket: tuple
    annulus_counts: list

    def to_json(self):
        return json.dumps(
            {
                "focal": np.asarray(self.focal).astype(complex).view(float).tolist(),
                "radii": list(self.radii),
                "sup_ratio": list(self.sup_ratio),
                "inf_ratio": list(self.inf_ratio),
                "L": self.L,
                "l": self.l,
                "H_star": self.H_star,
                "bracket": list(self.bracket),
            }
        )


def default_schedule(distances, annuli=8):
    """r_j = r0 * 2^-j with r0 at the 10th-percentile distance from focal."""
    positive = np.asarray([d for d in distances if d > 0])
    r0 = float(np.quantile(positive, 0.10))
    return [r0 * 2.0**-j for j in range(annuli)]


def _extrapolate(radii, values):
    """Linear-in-r fit through the last three annuli, evaluated at r = 0."""
    r = np.asarray(radii[-3:], dtype=float)
    v = np.asarray(values[-3:], dtype=float)
    if len(r) < 2:
        return float(v[-1])
    slope, intercept = np.polyfit(r, v, 1)
    return float(intercept)


def pointwise_distortion(sampled_map, schedule=None, n_min=30):
    """Annulus scan of image/source distance ratios around the focal point."""
    focal = sampled_map.focal
    focal_image = sampled_map.focal_image
    source_d = []
    ratios = []
    for s, im in zip(sampled_map.sources, sampled_map.images):
        d = float(sampled_map.source_metric(focal, s))
        if d <= 0:
            continue
        source_d.append(d)
        ratios.append(float(sampled_map.target_metric(focal_image, im)) / d)
    source_d = np.asarray(source_d)
    ratios = np.asarray(ratios)
    if schedule is None:
        schedule = default_schedule(source_d)
    sup_ratio, inf_ratio, counts = [], [], []
    for j, r in enumerate(schedule):
        inner = schedule[j + 1] if j + 1 < len(schedule) else 0.0
        mask = (source_d <= r) & (source_d > inner)
        count = int(np.sum(mask))
        if count < n_min:
            raise InsufficientSamples(f"annulus ({inner:.3g}, {r:.3g}]: {count} points")
        sup_ratio.append(float(np.max(ratios[mask])))
        inf_ratio.append(float(np.min(ratios[mask])))
        counts.append(count)
    big = _extrapolate(schedule, sup_ratio)
    small = _extrapolate(schedule, inf_ratio)
    big = max(big, 1e-300)
    small = min(max(small, 1e-300), big)
    h_star = big / small
    last_two = [
        sup_ratio[-1] / max(inf_ratio[-1], 1e-300),
        sup_ratio[-2] / max(inf_ratio[-2], 1e-300),
    ]
    bracket = (min(min(last_two), h_star), max(max(last_two), h_star))
    return DistortionReport(
        focal=focal,
        focal_image=focal_image,
        radii=list(schedule),
        sup_ratio=sup_ratio,
        inf_ratio=inf_ratio,
        L=big,
        l=small,
        H_star=h_star,
        bracket=bracket,
        annulus_counts=counts,
    )


def chain_distortion_bound(reports, composed_report=None, tolerance=1e-9):
    """Product of per-factor distortions; an upper bound for the composite.

    Composability means each factor's focal image is the next factor's
    focal point. When the directly measured composite report is supplied,
    the chain inequality is asserted up to ``tolerance``.
    """
    for a, b in zip(reports, reports[1:]):
        if not np.allclose(
            np.asarray(a.focal_image, dtype=complex).ravel(),
            np.asarray(b.focal, dtype=complex).ravel(),
            atol=1e-9,
        ):
            raise NotComposable("factor images do not line up")
    bound = float(np.prod([r.H_star for r in reports if hasattr(r, "H_star")]))
    if composed_report is not None:
        if composed_report.H_star > bound + tolerance:
            raise AssertionError(
                f"composite H*={composed_report.H_star:.6g} exceeds chain bound {bound:.6g}"
            )
    return bound


def bilipschitz_audit(sampled_map, region=None, min_pairs=100, max_pairs=2000, seed=0):
    """Smallest L with L^-1 d_X <= d_Y(F x, F y) <= L d_X on sampled pairs."""
    indices = [
        i
        for i, s in enumerate(sampled_map.sources)
        if region is None or region(s)
    ]
    n = len(indices)
    if n * (n - 1) // 2 < min_pairs:
        raise InsufficientSamples(f"{n} points in region")
    pairs = [(i, j) for a, i in enumerate(indices) for j in indices[a + 1 :]]
    if len(pairs) > max_pairs:
        chosen = np.random.default_rng(seed).choice(len(pairs), max_pairs, replace=False)
        pairs = [pairs[c] for c in chosen]
    worst = 1.0
    for i, j in pairs:
        dx = float(sampled_map.source_metric(sampled_map.sources[i], sampled_map.sources[j]))
        dy = float(sampled_map.target_metric(sampled_map.images[i], sampled_map.images[j]))
        if dx <= 0 or dy <= 0:
            continue
        ratio = dy / dx
        worst = max(worst, ratio, 1.0 / ratio)
    return worst
