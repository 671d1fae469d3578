"""Model Finsler metric near the boundary, curve lengths and geodesics.

The model norm at an interior point x with boundary distance d splits a
vector at the projection of x into complex-normal and horizontal parts and
combines |Z_N|^2 / (4 d^2) with the Levi form of the horizontal part over d.
Three modes are supported: the bare model value and the lower/upper
envelopes that bracket the invariant metrics of the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import domains
from .domains import (
    DefiningFunction,
    frames_batch,
    levi_value,
    project_batch,
    split_batch,
)
from .errors import NoConvergence, NotInDomain, OutsideTubular

MODES = ("model-center", "lower-envelope", "upper-envelope")


@dataclass
class FinslerModel:
    """Model metric on a domain with sandwich constants C and eps_bar."""

    domain: DefiningFunction
    envelope_constant: float = 0.0  # multiplies sqrt(boundary distance)
    eps_bar: float = 0.05
    mode: str = "model-center"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 <= self.eps_bar < 1:
            raise ValueError("eps_bar must lie in [0, 1)")
        if self.envelope_constant < 0:
            raise ValueError("envelope constant must be nonnegative")

    def norms(self, points, vectors):
        """Batched norm evaluation; points (..., n), vectors matching."""
        pts = np.asarray(points, dtype=complex)
        vecs = np.asarray(vectors, dtype=complex)
        proj, ok = project_batch(self.domain, pts, raise_on_failure=False)
        if not np.all(ok):
            raise NoConvergence("projection failed inside norm evaluation")
        depth = np.linalg.norm(pts - proj, axis=-1)
        inside = self.domain.phi(pts) < 0
        if not np.all(inside & (depth < self.domain.tubular_radius)):
            raise OutsideTubular("norm evaluated outside the collar")
        normals, levi = frames_batch(self.domain, proj)
        horiz, norm_part = split_batch(normals, vecs)
        zn2 = np.sum(np.abs(norm_part) ** 2, axis=-1)
        lv = levi_value(levi, horiz)
        if self.mode == "model-center":
            eps_factor, env = 1.0, 1.0
        elif self.mode == "lower-envelope":
            eps_factor = 1.0 - self.eps_bar
            env = np.maximum(1.0 - self.envelope_constant * np.sqrt(depth), 0.0)
        else:
            eps_factor = 1.0 + self.eps_bar
            env = 1.0 + self.envelope_constant * np.sqrt(depth)
        core = np.sqrt(zn2 / (4 * depth**2) + eps_factor * lv / depth)
        return env * core

    def norm(self, point, vector):
        return float(self.norms(np.asarray(point)[None], np.asarray(vector)[None])[0])

    def with_mode(self, mode):
        return replace(self, mode=mode)


@dataclass
class DiscreteCurve:
    """Polyline with node parameters in [0, 1]."""

    points: np.ndarray
    params: np.ndarray = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        if self.params is None:
            self.params = np.linspace(0.0, 1.0, len(self.points))
        else:
            self.params = np.asarray(self.params, dtype=float)
        if len(self.params) != len(self.points):
            raise ValueError("params and points must have equal length")

    def __len__(self):
        return len(self.points)

    def segments(self):
        return np.diff(self.points, axis=0)

    def midpoints(self):
        return 0.5 * (self.points[1:] + self.points[:-1])

    def refined(self):
        """Curve with every segment split in half."""
        mids = self.midpoints()
        pts = np.empty((2 * len(self.points) - 1, self.points.shape[1]), dtype=complex)
        pts[0::2] = self.points
        pts[1::2] = mids
        t = np.empty(2 * len(self.params) - 1)
        t[0::2] = self.params
        t[1::2] = 0.5 * (self.params[1:] + self.params[:-1])
        return DiscreteCurve(pts, t)


def curve_length(model, curve):
    """Sum of model norms of the segments, evaluated at segment midpoints."""
    pts = curve.points
    depth = -domains.signed_distance_batch(model.domain, pts)
    if np.any(depth <= 0) or np.any(depth >= model.domain.tubular_radius):
        raise OutsideTubular("curve node outside the collar or the domain")
    deltas = curve.segments()
    keep = np.linalg.norm(deltas, axis=-1) > 0
    if not np.any(keep):
        return 0.0
    return float(np.sum(model.norms(curve.midpoints()[keep], deltas[keep])))


def curve_length_refined(model, curve, refinements=1):
    """Richardson-extrapolated length from one or more dyadic refinements.

    Midpoint quadrature has second-order error, so two resolutions combine
    as (4 L_fine - L_coarse) / 3.
    """
    coarse = curve_length(model, curve)
    for _ in range(refinements):
        curve = curve.refined()
        fine = curve_length(model, curve)
        coarse, fine = fine, (4 * fine - coarse) / 3
    return fine


def lift_curve(domain, boundary_curve, height):
    """Push a boundary curve inward to the given Euclidean depth."""
    if not 0 < height < domain.tubular_radius:
        raise OutsideTubular("lift height must lie in (0, tubular radius)")
    pts = np.asarray(boundary_curve.points, dtype=complex)
    if np.max(np.abs(domain.phi(pts))) > 1e-8:
        raise ValueError("curve nodes must lie on the boundary")
    normals, _ = frames_batch(domain, pts)
    return DiscreteCurve(pts - height * normals, boundary_curve.params.copy())


@dataclass
class GeodesicOptions:
    nodes: int = 32
    seed: int = 0
    multistart: int = 0
    max_iter: int = 400
    gradient_tol: float = 1e-8
    fd_step: float = 1e-7


def _chord_initialization(model, x, y, nodes, rng=None, bump=0.0):
    """Straight chord between the endpoints, pulled inside the collar."""
    dom = model.domain
    t = np.linspace(0.0, 1.0, nodes + 1)[:, None]
    pts = (1 - t) * x[None, :] + t * y[None, :]
    if bump > 0 and rng is not None:
        direction = rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n)
        direction /= np.linalg.norm(direction)
        profile = np.sin(np.pi * t[:, 0])[:, None]
        pts = pts + bump * profile * direction[None, :]
    proj, ok = project_batch(dom, pts, raise_on_failure=False)
    depth = np.where(ok, np.linalg.norm(pts - proj, axis=-1), np.nan)
    sign = np.where(dom.phi(pts) < 0, -1.0, 1.0)
    depth = sign * depth
    d0, d1 = depth[0], depth[-1]
    target = (1 - t[:, 0]) * d0 + t[:, 0] * d1  # negative depths
    normals, _ = frames_batch(dom, proj)
    # re-seat any node whose depth strayed from the interpolated profile
    bad = ~ok | (depth > 0.5 * target) | (depth < 2.0 * np.minimum(d0, d1))
    bad[0] = bad[-1] = False
    pts[bad] = proj[bad] + target[bad, None] * normals[bad]
    return pts


def geodesic_distance(model, x, y, options=None):
    """Locally shortest model length between interior points and its curve.

    Limited-memory quasi-Newton descent on the interior nodes of a
    polyline, with the discrete-length gradient formed by vectorized
    central differences.  Deterministic for a fixed options seed.
    """
    options = options or GeodesicOptions()
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    dom = model.domain
    for endpoint in (x, y):
        d = domains.signed_distance(dom, endpoint)
        if d >= 0:
            raise NotInDomain("geodesic endpoints must be interior")
        if -d >= dom.tubular_radius:
            raise OutsideTubular("geodesic endpoints must lie in the collar")
    if np.allclose(x, y, atol=1e-15):
        curve = DiscreteCurve(np.stack([x, y]))
        return 0.0, curve

    rng = np.random.default_rng(options.seed)
    nodes = options.nodes
    n = dom.n
    free = nodes - 1

    def lengths_batch(interiors):
        """interiors: (B, free, n) complex -> (B,) lengths (inf when invalid)."""
        b = interiors.shape[0]
        full = np.empty((b, nodes + 1, n), dtype=complex)
        full[:, 0] = x
        full[:, -1] = y
        full[:, 1:-1] = interiors
        flat = full.reshape(-1, n)
        proj, ok = project_batch(dom, flat, raise_on_failure=False)
        depth = np.linalg.norm(flat - proj, axis=-1)
        inside = (dom.phi(flat) < 0) & ok & (depth < dom.tubular_radius)
        normals, levi = frames_batch(dom, proj)
        mids = 0.5 * (full[:, 1:] + full[:, :-1]).reshape(-1, n)
        mproj, mok = project_batch(dom, mids, raise_on_failure=False)
        mdepth = np.linalg.norm(mids - mproj, axis=-1)
        minside = (dom.phi(mids) < 0) & mok & (mdepth < dom.tubular_radius)
        deltas = np.diff(full, axis=1).reshape(-1, n)
        mnormals, mlevi = frames_batch(dom, mproj)
        horiz, norm_part = split_batch(mnormals, deltas)
        zn2 = np.sum(np.abs(norm_part) ** 2, axis=-1)
        lv = np.maximum(levi_value(mlevi, horiz), 0.0)
        if model.mode == "model-center":
            eps_factor, env = 1.0, 1.0
        elif model.mode == "lower-envelope":
            eps_factor = 1.0 - model.eps_bar
            env = np.maximum(
                1.0 - model.envelope_constant * np.sqrt(mdepth), 0.0
            )
        else:
            eps_factor = 1.0 + model.eps_bar
            env = 1.0 + model.envelope_constant * np.sqrt(mdepth)
        with np.errstate(all="ignore"):
            seg = env * np.sqrt(zn2 / (4 * mdepth**2) + eps_factor * lv / mdepth)
        seg = np.where(minside, seg, np.nan)
        total = np.sum(seg.reshape(b, nodes), axis=1)
        node_ok = np.all(inside.reshape(b, nodes + 1)[:, 1:-1], axis=1)
        return np.where(node_ok & np.isfinite(total), total, np.inf)

    def objective(u):
        interior = u.view(complex).reshape(1, free, n)
        return float(lengths_batch(interior)[0])

    def gradient(u):
        h = options.fd_step
        d = len(u)
        base = u[None, :].repeat(2 * d, axis=0)
        idx = np.arange(d)
        base[idx, idx] += h
        base[d + idx, idx] -= h
        vals = lengths_batch(base.view(complex).reshape(2 * d, free, n))
        g = (vals[:d] - vals[d:]) / (2 * h)
        return np.where(np.isfinite(g), g, 0.0)

    inits = [_chord_initialization(model, x, y, nodes)]
    chord_span = np.linalg.norm(y - x)
    for k in range(options.multistart):
        inits.append(
            _chord_initialization(
                model, x, y, nodes, rng=rng, bump=0.15 * chord_span * (k + 1) / max(options.multistart, 1)
            )
        )

    best_val, best_pts = np.inf, None
    for init in inits:
        u0 = init[1:-1].reshape(-1).view(float).copy()
        start_val = objective(u0)
        if not np.isfinite(start_val):
            continue
        result = minimize(
            objective,
            u0,
            jac=gradient,
            method="L-BFGS-B",
            options={
                "maxiter": options.max_iter,
                "gtol": options.gradient_tol,
                "ftol": 1e-14,
            },
        )
        val = min(start_val, float(result.fun))
        pts = result.x if result.fun <= start_val else u0
        if val < best_val:
            best_val = val
            best_pts = pts
    if best_pts is None:
        raise NoConvergence("no geodesic initialization stayed inside the collar")
    interior = best_pts.view(complex).reshape(free, n)
    full = np.vstack([x[None], interior, y[None]])
    return best_val, DiscreteCurve(full)


def fit_envelope_constant(model, samples=2000, seed=0, max_depth=0.05):
    """Fit the envelope constant on the ball against the exact oracle.

    Returns the smallest C with |K_exact / K_model - 1| <= C sqrt(depth)
    over the sampled points and directions.
    """
    from .ball_oracle import BallOracle

    dom = model.domain
    if dom.name != "ball" or dom.params[1] != 1.0:
        raise ValueError("the exact oracle is available on the unit ball only")
    rng = np.random.default_rng(seed)
    n = dom.n
    direction = rng.standard_normal((samples, n)) + 1j * rng.standard_normal(
        (samples, n)
    )
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    depth = rng.uniform(1e-4, max_depth, samples)
    pts = (1 - depth)[:, None] * direction
    vecs = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    center = model.with_mode("model-center")
    model_vals = center.norms(pts, vecs)
    oracle = BallOracle(n)
    exact_vals = np.array(
        [oracle.infinitesimal_norm(p, v) for p, v in zip(pts, vecs)]
    )
    ratio = np.abs(exact_vals / model_vals - 1.0)
    return float(np.max(ratio / np.sqrt(depth)))
