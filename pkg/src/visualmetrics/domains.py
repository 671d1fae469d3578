"""Strictly pseudoconvex domains given by a smooth defining function.

Points of C^n are numpy complex arrays of shape (..., n).  A domain is
described by a real-valued defining function, negative inside, positive
outside, together with evaluators for its real gradient and its complex
Hessian.  The real gradient of a function on C^n ~ R^{2n} is carried as a
complex vector G with G_a = d/dx_a + i d/dy_a, so that |G| is the Euclidean
gradient norm and the directional derivative along a complex vector v is
Re<v, G>.

All evaluators are batched: they accept arrays of points and broadcast over
the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DegenerateBoundary,
    NoConvergence,
    NotInDomain,
    NotStrictlyPseudoconvex,
    OutsideTubular,
)

HERMITIAN_TOL = 1e-10
BOUNDARY_TOL = 1e-10
PROJECTION_TOL = 1e-12
PROJECTION_MAX_ITER = 100
FD_STEP = 1e-5


def hermitian_part(matrices):
    """Symmetrize (..., n, n) complex matrices, enforcing Hermitianity."""
    return 0.5 * (matrices + np.conj(np.swapaxes(matrices, -1, -2)))


@dataclass
class DefiningFunction:
    """A bounded domain {phi < 0} in C^n with analytic boundary data.

    ``phi`` maps (..., n) complex points to real values, ``grad`` to the
    real gradient in complex form (see module docstring), ``hess`` to the
    complex Hessian d^2 phi / dz_a dzbar_b as (..., n, n) matrices.  The
    Hessian is Hermitian-symmetrized on every call.
    """

    n: int
    phi: Callable
    grad: Callable
    hess: Callable
    bbox_lo: np.ndarray  # real coordinates, length 2n
    bbox_hi: np.ndarray
    tubular_radius: float  # guaranteed collar width for unique projection
    name: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("complex dimension must be at least 2")
        raw_hess = self.hess
        self.hess = lambda z: hermitian_part(np.asarray(raw_hess(z)))

    def contains(self, z):
        return self.phi(np.asarray(z, dtype=complex)) < 0

    def in_expanded_bbox(self, z):
        x = complex_to_real(np.asarray(z, dtype=complex))
        pad = self.tubular_radius
        return bool(
            np.all(x >= self.bbox_lo - pad) and np.all(x <= self.bbox_hi + pad)
        )


@dataclass
class BoundaryFrame:
    """Normal direction, H/N splitting and Levi form at one boundary point.

    The Levi matrix is normalized by the boundary gradient norm, so that it
    agrees with the Levi form of the signed distance function on the
    maximal complex tangent space.
    """

    point: np.ndarray
    normal: np.ndarray        # outward unit normal, complex form
    complex_normal: np.ndarray  # unit spanning vector of the normal line
    levi_matrix: np.ndarray   # (n, n) Hermitian, normalized
    gradient_norm: float

    @property
    def normal_projector(self):
        nu = self.complex_normal
        return np.outer(nu, np.conj(nu))

    @property
    def horizontal_projector(self):
        return np.eye(len(self.complex_normal)) - self.normal_projector

    def split(self, vector):
        """Decompose a C^n vector into horizontal and complex-normal parts."""
        nu = self.complex_normal
        coeff = np.sum(np.asarray(vector, dtype=complex) * np.conj(nu), axis=-1)
        normal_part = coeff[..., None] * nu
        return vector - normal_part, normal_part

    def levi(self, vector):
        """Levi form on the horizontal part of ``vector``."""
        horizontal, _ = self.split(np.asarray(vector, dtype=complex))
        return levi_value(self.levi_matrix, horizontal)

    def horizontal_eigenvalues(self):
        """Eigenvalues of the Levi matrix restricted to the horizontal space."""
        basis = horizontal_basis(self.complex_normal)
        restricted = np.conj(basis.T) @ self.levi_matrix @ basis
        return np.linalg.eigvalsh(restricted)


@dataclass
class TubularNeighborhood:
    """Certified collar of the boundary with unique nearest-point projection."""

    radius: float
    domain: DefiningFunction


def complex_to_real(z):
    """(..., n) complex -> (..., 2n) real with (Re, Im) interleaved."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def real_to_complex(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def levi_value(matrix, vector):
    """Evaluate a Hermitian (..., n, n) form on (..., n) vectors (real output)."""
    mv = np.einsum("...ab,...b->...a", matrix, vector)
    return np.real(np.sum(np.conj(vector) * mv, axis=-1))


def horizontal_basis(complex_normal):
    """Orthonormal basis (n, n-1) of the Hermitian complement of the normal."""
    n = len(complex_normal)
    seed = np.eye(n, dtype=complex)
    stacked = np.column_stack([complex_normal, seed])
    q, _ = np.linalg.qr(stacked)
    # first column spans the normal line up to phase; the rest span H
    return q[:, 1:n]


def finite_difference_evaluators(phi, n, step=FD_STEP):
    """Build gradient and complex-Hessian evaluators from phi alone.

    Central differences with the given step; accuracy is limited to about
    step**2 and the result is flagged for lower-accuracy use only.
    """

    def grad(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for a in range(n):
            e = np.zeros(n)
            e[a] = step
            out[..., a] = (phi(z + e) - phi(z - e)) / (2 * step) + 1j * (
                phi(z + 1j * e) - phi(z - 1j * e)
            ) / (2 * step)
        return out

    def hess(z):
        # d^2/dz dzbar = (1/4)(Hxx + Hyy) + (i/4)(Hxy - Hyx) via gradient FD
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (n,), dtype=complex)
        for b in range(n):
            e = np.zeros(n)
            e[b] = step
            dgx = (grad(z + e) - grad(z - e)) / (2 * step)
            dgy = (grad(z + 1j * e) - grad(z - 1j * e)) / (2 * step)
            # grad = 2 d/dzbar phi; apply d/dz_b = (d/dx_b - i d/dy_b)/2
            out[..., b] = 0.25 * (dgx - 1j * dgy)
        return out

    return grad, hess


# ---------------------------------------------------------------------------
# built-in domains


def unit_ball(n=2, radius=1.0):
    """Ball of the given radius; phi = |z| - radius is the signed distance."""

    def phi(z):
        return np.linalg.norm(np.asarray(z, dtype=complex), axis=-1) - radius

    def grad(z):
        z = np.asarray(z, dtype=complex)
        r = np.linalg.norm(z, axis=-1, keepdims=True)
        return z / r

    def hess(z):
        z = np.asarray(z, dtype=complex)
        r = np.linalg.norm(z, axis=-1)
        eye = np.eye(n, dtype=complex)
        outer = z[..., :, None] * np.conj(z[..., None, :])
        return eye / (2 * r[..., None, None]) - outer / (4 * r[..., None, None] ** 3)

    reach = radius
    return DefiningFunction(
        n=n,
        phi=phi,
        grad=grad,
        hess=hess,
        bbox_lo=np.full(2 * n, -radius),
        bbox_hi=np.full(2 * n, radius),
        tubular_radius=0.9 * reach,
        name="ball",
        params=(n, radius),
    )


def ellipsoid(coefficients):
    """Complex ellipsoid sum_a c_a |z_a|^2 = 1 with c_a > 0."""
    coeffs = np.asarray(coefficients, dtype=float)
    if np.any(coeffs <= 0):
        raise ValueError("ellipsoid coefficients must be positive")
    n = len(coeffs)
    semi_axes = 1.0 / np.sqrt(coeffs)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return np.real(np.sum(coeffs * np.abs(z) ** 2, axis=-1)) - 1.0

    def grad(z):
        return 2.0 * coeffs * np.asarray(z, dtype=complex)

    def hess(z):
        z = np.asarray(z, dtype=complex)
        eye = np.diag(coeffs).astype(complex)
        return np.broadcast_to(eye, z.shape[:-1] + (n, n)).copy()

    # reach of an ellipsoid equals its smallest curvature radius
    reach = float(np.min(semi_axes) ** 2 / np.max(semi_axes))
    lo = np.repeat(-semi_axes, 2)
    hi = np.repeat(semi_axes, 2)
    return DefiningFunction(
        n=n,
        phi=phi,
        grad=grad,
        hess=hess,
        bbox_lo=lo,
        bbox_hi=hi,
        tubular_radius=0.8 * reach,
        name="ellipsoid",
        params=tuple(coeffs),
    )


def domain_by_name(name, params):
    """Resolve a config-file domain spec (name + parameter list)."""
    if name == "ball":
        n = int(params[0]) if params else 2
        radius = float(params[1]) if len(params) > 1 else 1.0
        return unit_ball(n, radius)
    if name == "ellipsoid":
        return ellipsoid([float(p) for p in params])
    raise ValueError(f"unknown domain {name!r}")


# ---------------------------------------------------------------------------
# nearest-point projection


def _surface_flow(domain, points, iterations=4):
    """First-order steps onto the zero level set along the gradient."""
    p = np.array(points, dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(iterations):
            g = domain.grad(p)
            gn2 = np.sum(np.abs(g) ** 2, axis=-1, keepdims=True)
            p = p - (np.asarray(domain.phi(p))[..., None] / gn2) * g
    return p


def project_batch(
    domain,
    points,
    tol=PROJECTION_TOL,
    max_iter=PROJECTION_MAX_ITER,
    initial=None,
    raise_on_failure=True,
):
    """Nearest boundary point for a batch of points near the boundary.

    Damped Newton iteration on the stationarity system of the closest-point
    problem: the offset to the projection must be parallel to the gradient
    there, and the projection must lie on the zero level set.  The Jacobian
    block containing the real Hessian is assembled by finite differences of
    the analytic gradient.

    Returns (projections, converged_mask) where projections has the shape
    of ``points``.
    """
    z = np.atleast_2d(np.asarray(points, dtype=complex))
    flat = z.reshape(-1, domain.n)
    m, n = flat.shape
    dim = 2 * n

    p = _surface_flow(domain, flat if initial is None else np.atleast_2d(initial).reshape(-1, n))
    x_r = complex_to_real(flat)
    p_r = complex_to_real(p)

    with np.errstate(all="ignore"):
        g = domain.grad(real_to_complex(p_r))
        g_r = complex_to_real(g)
        gn2 = np.sum(g_r**2, axis=-1)
        lam = np.sum((x_r - p_r) * g_r, axis=-1) / gn2

    def residual(target_r, p_r, lam):
        with np.errstate(all="ignore"):
            pc = real_to_complex(p_r)
            g_r = complex_to_real(domain.grad(pc))
            top = target_r - p_r - lam[:, None] * g_r
            bottom = np.asarray(domain.phi(pc))
        return np.concatenate([top, bottom[:, None]], axis=1), g_r

    res, g_r = residual(x_r, p_r, lam)
    res_norm = np.max(np.abs(res), axis=1)
    step = 1e-7

    for _ in range(max_iter):
        active = res_norm > tol
        if not np.any(active):
            break
        pa, la = p_r[active], lam[active]
        ga = g_r[active]
        k = pa.shape[0]

        hess_real = np.empty((k, dim, dim))
        with np.errstate(all="ignore"):
            for j in range(dim):
                e = np.zeros(dim)
                e[j] = step
                gp = complex_to_real(domain.grad(real_to_complex(pa + e)))
                gm = complex_to_real(domain.grad(real_to_complex(pa - e)))
                hess_real[:, :, j] = (gp - gm) / (2 * step)

        jac = np.zeros((k, dim + 1, dim + 1))
        jac[:, :dim, :dim] = -np.eye(dim) - la[:, None, None] * hess_real
        jac[:, :dim, dim] = -ga
        jac[:, dim, :dim] = ga
        bad = ~np.all(np.isfinite(jac.reshape(k, -1)), axis=1) | ~np.all(
            np.isfinite(res[active]), axis=1
        )
        jac[bad] = np.eye(dim + 1)
        rhs = np.where(bad[:, None], 0.0, -res[active])
        delta = np.linalg.solve(jac, rhs[..., None])[..., 0]

        # backtracking on the residual norm
        scale = np.ones(k)
        base = res_norm[active]
        new_p = pa + scale[:, None] * delta[:, :dim]
        new_l = la + scale * delta[:, dim]
        xa = x_r[active]
        for _ in range(25):
            trial_res, trial_g = residual(xa, new_p, new_l)
            trial_norm = np.max(np.abs(trial_res), axis=1)
            worse = trial_norm > base
            if not np.any(worse):
                break
            scale[worse] *= 0.5
            new_p = pa + scale[:, None] * delta[:, :dim]
            new_l = la + scale * delta[:, dim]
            if np.min(scale) < 1e-12:
                break
        p_r[active] = new_p
        lam[active] = new_l
        res_sub, g_sub = residual(xa, new_p, new_l)
        res[active] = res_sub
        g_r[active] = g_sub
        res_norm[active] = np.max(np.abs(res_sub), axis=1)

    converged = res_norm <= tol
    if raise_on_failure and not np.all(converged):
        raise NoConvergence(
            f"projection failed for {int(np.sum(~converged))} of {m} points"
        )
    proj = real_to_complex(p_r).reshape(z.shape)
    if np.asarray(points).ndim == 1:
        return proj[0], bool(converged[0])
    return proj, converged


def project_to_boundary(domain, point):
    """Nearest boundary point; refuses points outside the tubular collar."""
    z = np.asarray(point, dtype=complex)
    proj, ok = project_batch(domain, z, raise_on_failure=False)
    if np.ndim(ok):
        ok = bool(np.all(ok))
    if not ok:
        raise NoConvergence("projection solver did not converge")
    dist = float(np.linalg.norm(z - proj))
    if dist >= domain.tubular_radius:
        raise OutsideTubular(
            f"distance {dist:.3g} >= tubular radius {domain.tubular_radius:.3g}"
        )
    return proj


def signed_distance_batch(domain, points):
    """Signed Euclidean distance to the boundary for a batch of points."""
    z = np.atleast_2d(np.asarray(points, dtype=complex))
    proj, _ = project_batch(domain, z)
    d = np.linalg.norm(z - proj, axis=-1)
    sign = np.where(domain.phi(z) < 0, -1.0, 1.0)
    out = sign * d
    if np.asarray(points).ndim == 1:
        return float(out[0])
    return out


def signed_distance(domain, point):
    """Signed distance to the boundary, negative inside the domain."""
    z = np.asarray(point, dtype=complex)
    if not domain.in_expanded_bbox(z):
        raise OutsideTubular("point outside the expanded bounding box")
    proj, ok = project_batch(domain, z, raise_on_failure=False)
    if not ok:
        raise NoConvergence("projection solver did not converge")
    d = float(np.linalg.norm(z - proj))
    if abs(domain.phi(z)) < BOUNDARY_TOL and d < BOUNDARY_TOL:
        return 0.0
    return float(np.sign(domain.phi(z)) * d)


def height(domain, point):
    """sqrt of the boundary distance, defined for interior points only."""
    z = np.asarray(point, dtype=complex)
    if domain.phi(z) >= 0:
        raise NotInDomain("height is defined for interior points")
    return float(np.sqrt(-signed_distance(domain, z)))


def height_batch(domain, points):
    d = signed_distance_batch(domain, points)
    if np.any(d >= 0):
        raise NotInDomain("height is defined for interior points")
    return np.sqrt(-d)


# ---------------------------------------------------------------------------
# boundary frames


def boundary_frame(domain, point, check_pseudoconvexity=True):
    """Normal, splitting and Levi data at a boundary point."""
    p = np.asarray(point, dtype=complex)
    if abs(float(domain.phi(p))) >= BOUNDARY_TOL:
        raise ValueError("point is not on the boundary")
    g = domain.grad(p)
    gn = float(np.linalg.norm(g))
    nu = g / gn
    levi = domain.hess(p) / gn
    frame = BoundaryFrame(
        point=p, normal=nu, complex_normal=nu, levi_matrix=levi, gradient_norm=gn
    )
    if check_pseudoconvexity:
        eigs = frame.horizontal_eigenvalues()
        if np.min(eigs) <= 1e-12:
            raise NotStrictlyPseudoconvex(
                f"Levi form eigenvalue {np.min(eigs):.3g} at boundary point"
            )
    return frame


def frames_batch(domain, points):
    """Vectorized frame data: unit normals and normalized Levi matrices."""
    p = np.asarray(points, dtype=complex)
    g = domain.grad(p)
    gn = np.linalg.norm(g, axis=-1)
    nu = g / gn[..., None]
    levi = domain.hess(p) / gn[..., None, None]
    return nu, levi


def split_batch(normals, vectors):
    """Horizontal/normal decomposition for batches of frames and vectors."""
    coeff = np.sum(np.asarray(vectors, dtype=complex) * np.conj(normals), axis=-1)
    normal_part = coeff[..., None] * normals
    return vectors - normal_part, normal_part


# ---------------------------------------------------------------------------
# tubular radius estimation


def _boundary_samples(domain, count, rng):
    raw = rng.standard_normal((count, domain.n)) + 1j * rng.standard_normal(
        (count, domain.n)
    )
    raw /= np.linalg.norm(raw, axis=-1, keepdims=True)
    # scale roughly to the boundary, then polish with the projection solver
    scale = 0.5 * float(np.max(domain.bbox_hi))
    pts, ok = project_batch(domain, scale * raw, raise_on_failure=False)
    return pts[ok]


def estimate_tubular_radius(domain, samples=200, seed=0, starts=4, bisection_steps=25):
    """Probe the largest collar width with a convergent, single-valued projection.

    Bisection over the depth: at each trial depth the sampled boundary
    points are pushed inward along the normal and re-projected from several
    perturbed starts; the depth passes when every start converges to the
    same point at the correct distance.  Deterministic for a fixed seed.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    base = _boundary_samples(domain, samples, rng)
    if len(base) < samples // 2:
        raise DegenerateBoundary("could not sample the boundary")
    normals, _ = frames_batch(domain, base)
    perturbations = rng.standard_normal(
        (starts, len(base), domain.n)
    ) + 1j * rng.standard_normal((starts, len(base), domain.n))

    def depth_ok(depth):
        inner = base - depth * normals
        ref, ok = project_batch(domain, inner, raise_on_failure=False)
        if not np.all(ok):
            return False
        dist = np.linalg.norm(inner - ref, axis=-1)
        if np.any(np.abs(dist - depth) > 1e-6 * (1 + depth)):
            return False
        for k in range(starts):
            jitter = perturbations[k]
            jitter = jitter / np.linalg.norm(jitter, axis=-1, keepdims=True)
            init = inner + 0.5 * depth * jitter
            alt, ok = project_batch(
                domain, inner, initial=init, raise_on_failure=False
            )
            if not np.all(ok):
                return False
            if np.max(np.linalg.norm(alt - ref, axis=-1)) > 1e-6 * (1 + depth):
                return False
        return True

    hi = 0.5 * float(np.linalg.norm(domain.bbox_hi - domain.bbox_lo))
    lo = 0.0
    probe = min(hi, 1e-3)
    if not depth_ok(probe):
        raise DegenerateBoundary("no positive tubular radius found")
    lo = probe
    if depth_ok(hi):
        lo = hi
    else:
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            if depth_ok(mid):
                lo = mid
            else:
                hi = mid
    return TubularNeighborhood(radius=lo, domain=domain)
