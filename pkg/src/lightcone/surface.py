"""Surfaces in the light-cone model.

A map into the conformal n-sphere is stored through a null lift sigma into
the light cone of R^{n+1,1}, sampled on a chart grid, together with its
chart derivatives.  Euclidean surfaces f : Sigma -> R^n enter through the
standard paraboloid lift; surfaces in the round S^n through sigma = (p, 1).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import chart as ch
from . import minkowski as mk
from .errors import (BranchPoint, DegenerateCongruence, HitsInfinity,
                     NotImmersed, UnknownSurface)


@dataclass(frozen=True)
class SurfaceData:
    """A lift of a surface with cached chart derivatives.

    sigma has shape (nx, ny, m) with m = n + 2; derivative fields are
    obtained by the grid stencils, so all pointwise identities hold to
    O(h^2) only.
    """

    grid: ch.ChartGrid
    n: int
    sigma: np.ndarray
    sigma_z: np.ndarray = field(repr=False, default=None)
    sigma_zb: np.ndarray = field(repr=False, default=None)
    sigma_zz: np.ndarray = field(repr=False, default=None)
    sigma_zzb: np.ndarray = field(repr=False, default=None)
    name: str = ""
    params: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def signature(self):
        return mk.Signature(self.n)

    @property
    def g(self):
        return self.signature.diag

    @property
    def m(self):
        return self.n + 2

    @staticmethod
    def from_lift(grid, n, sigma, name="", params=None, flags=None):
        sigma = np.asarray(sigma, dtype=complex)
        sz = ch.diff_z(sigma, grid)
        szb = ch.diff_zbar(sigma, grid)
        return SurfaceData(
            grid=grid, n=n, sigma=sigma,
            sigma_z=sz, sigma_zb=szb,
            sigma_zz=ch.diff_z(sz, grid),
            sigma_zzb=ch.diff_zbar(sz, grid),
            name=name, params=dict(params or {}), flags=dict(flags or {}),
        )

    def nullity_defect(self):
        return float(np.max(np.abs(mk.norm2(self.sigma, self.g))))

    def conformality_defect(self):
        return float(np.max(np.abs(mk.norm2(self.sigma_z, self.g))))

    def reality_defect(self):
        return float(np.max(np.abs(np.imag(self.sigma))))


@dataclass(frozen=True)
class BundleFrame:
    """A subbundle of the trivial C^m bundle given by spanning vector fields,
    stacked as (nx, ny, k, m)."""

    vectors: np.ndarray
    g: np.ndarray

    @property
    def rank(self):
        return self.vectors.shape[-2]

    def gram(self):
        return mk.gram(self.vectors, self.g)

    def projector(self, cond_threshold=1e8):
        return mk.gram_projector(self.vectors, self.g, cond_threshold)

    def map_by(self, T):
        """Pointwise image frame under a matrix field T (nx, ny, m, m)."""
        return BundleFrame(self.vectors @ np.swapaxes(T, -1, -2), self.g)

    def conj(self):
        return BundleFrame(np.conj(self.vectors), self.g)

    def isotropy_defect(self):
        return float(np.max(np.abs(self.gram())))


def euclidean_lift(f, grid):
    """Paraboloid lift of f : Sigma -> R^n into the light cone,
    sigma = (f, (1-|f|^2)/2, (1+|f|^2)/2); null by construction."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    f2 = np.sum(f * f, axis=-1)
    sigma = np.concatenate(
        [f, (0.5 * (1.0 - f2))[..., None], (0.5 * (1.0 + f2))[..., None]],
        axis=-1,
    )
    return SurfaceData.from_lift(grid, n, sigma)


def euclidean_v_inf(n):
    """Null space-form vector with (sigma, v_inf) = -1 for the paraboloid
    lift: recovers flat Euclidean R^n."""
    v = np.zeros(n + 2)
    v[n] = -1.0
    v[n + 1] = 1.0
    return v


def sphere_lift(p, grid):
    """Lift sigma = (p, 1) of p : Sigma -> S^n subset R^{n+1}."""
    p = np.asarray(p, dtype=float)
    n = p.shape[-1] - 1
    sigma = np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)
    return SurfaceData.from_lift(grid, n, sigma)


def sphere_v_inf(n):
    """Timelike v_inf = e_{n+1} identifying P(L) with the round S^n (K = 1)."""
    v = np.zeros(n + 2)
    v[n + 1] = 1.0
    return v


def rescale_lift(s, u):
    """Replace sigma by e^u sigma for a smooth scalar field u (lift freedom)."""
    factor = np.exp(np.asarray(u))[..., None]
    return SurfaceData.from_lift(s.grid, s.n, s.sigma * factor,
                                 name=s.name, params=s.params, flags=s.flags)


def normalized_lift(s, tol=1e-12):
    """Rescale so that (sigma_z, sigma_zbar) = 1/2 (normalized lift).

    Raises BranchPoint where the pairing vanishes (non-immersed point with
    respect to the chart).
    """
    pairing = mk.inner(s.sigma_z, s.sigma_zb, s.g)
    pr = np.real(pairing)
    if np.min(pr) <= tol:
        raise BranchPoint(
            f"(sigma_z, sigma_zbar) reaches {np.min(pr):.3e}; not an immersion"
        )
    factor = 1.0 / np.sqrt(2.0 * pr)
    return SurfaceData.from_lift(s.grid, s.n, s.sigma * factor[..., None],
                                 name=s.name, params=s.params, flags=s.flags)


def derived_bundles(s, cond_threshold=1e8):
    """The line bundle and its first-order companions:
    (Lambda, Lambda^{1,0}, Lambda^{0,1}, Lambda^{(1)})."""
    lam = BundleFrame(s.sigma[..., None, :], s.g)
    lam10 = BundleFrame(np.stack([s.sigma, s.sigma_z], axis=-2), s.g)
    lam01 = BundleFrame(np.stack([s.sigma, s.sigma_zb], axis=-2), s.g)
    lam1 = BundleFrame(np.stack([s.sigma, s.sigma_z, s.sigma_zb], axis=-2), s.g)
    sv = np.linalg.svd(lam1.vectors, compute_uv=False)
    if np.min(sv[..., 2] / sv[..., 0]) < 1.0 / cond_threshold:
        raise NotImmersed("span{sigma, sigma_z, sigma_zbar} drops below rank 3")
    return lam, lam10, lam01, lam1


def central_sphere(s, cond_threshold=1e8):
    """Central sphere congruence S = <sigma, sigma_z, sigma_zbar, sigma_zzbar>,
    the rank-4 signature-(3,1) bundle of mean-curvature spheres."""
    frame = np.stack([s.sigma, s.sigma_z, s.sigma_zb, s.sigma_zzb], axis=-2)
    S = BundleFrame(frame, s.g)
    try:
        S.projector(cond_threshold)
    except Exception as exc:
        raise DegenerateCongruence(str(exc)) from exc
    return S


def congruence_signature(S):
    """Counts of (positive, negative) Gram eigenvalues of the real frame
    spanning S; a genuine sphere congruence has signature (3, 1)."""
    v = S.vectors
    real_frame = np.concatenate([np.real(v), np.imag(v)], axis=-2)
    G = mk.gram(real_frame.astype(complex), S.g).real
    w = np.linalg.eigvalsh(G)
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    pos = np.sum(w > 1e-10 * scale, axis=-1)
    neg = np.sum(w < -1e-10 * scale, axis=-1)
    return pos, neg


def spaceform_project(s, v_inf, tol=1e-12):
    """Projection sigma_inf = -sigma / (sigma, v_inf) into the space form
    S_{v_inf}; satisfies (sigma_inf, v_inf) = -1 exactly."""
    v_inf = np.asarray(v_inf, dtype=float)
    denom = mk.inner(s.sigma, v_inf.astype(complex), s.g)
    if np.min(np.abs(denom)) < tol:
        raise HitsInfinity("(sigma, v_inf) vanishes on the grid")
    return np.real(-s.sigma / denom[..., None])


def euclidean_graph(s, tol=1e-12):
    """Invert the paraboloid lift: recover f from any lift of the same line
    bundle (round trip of euclidean_lift)."""
    n = s.n
    points = spaceform_project(s, euclidean_v_inf(n), tol)
    return points[..., :n]


def principal_angles(frame_a, frame_b):
    """Principal angles between pointwise spans, using the Hermitian metric
    of C^m (span comparison only; no Lorentzian content)."""
    qa, _ = np.linalg.qr(np.swapaxes(frame_a.vectors, -1, -2))
    qb, _ = np.linalg.qr(np.swapaxes(frame_b.vectors, -1, -2))
    svals = np.linalg.svd(np.conj(np.swapaxes(qa, -1, -2)) @ qb, compute_uv=False)
    return np.arccos(np.clip(svals, -1.0, 1.0))


def intersection_line(frame_a, frame_b, tol=1e-6):
    """Pointwise intersection of two rank-2 subbundles.

    Returns (line BundleFrame, dimension field).  The dimension field counts
    singular values of [A^T, -B^T] below tol, which is the intersection
    dimension of the spans.
    """
    A = np.swapaxes(frame_a.vectors, -1, -2)
    B = np.swapaxes(frame_b.vectors, -1, -2)
    M = np.concatenate([A, -B], axis=-1)
    u, sv, vh = np.linalg.svd(M, full_matrices=True)
    k = A.shape[-1]
    coeff = np.conj(vh[..., -1, :k])
    vec = np.einsum("...mk,...k->...m", A, coeff)
    nrm = np.linalg.norm(vec, axis=-1, keepdims=True)
    vec = vec / np.maximum(nrm, 1e-300)
    scale = sv[..., 0]
    ncols = M.shape[-1]
    nsmall = np.sum(sv < tol * scale[..., None], axis=-1) + max(0, ncols - sv.shape[-1])
    return BundleFrame(vec[..., None, :], frame_a.g), nsmall


# ---------------------------------------------------------------------------
# surface catalog


def _zoo_round_sphere(params, grid):
    # inverse stereographic image of a disc-like chart patch: conformal
    X, Y = grid.meshgrid()
    d = 1.0 + X ** 2 + Y ** 2
    f = np.stack([2 * X / d, 2 * Y / d, (X ** 2 + Y ** 2 - 1.0) / d], axis=-1)
    return euclidean_lift(f, grid), dict(willmore=True, constrained_willmore=True,
                                         isothermic=True, umbilic=True)


def _zoo_clifford_torus(params, grid):
    X, Y = grid.meshgrid()
    r = 1.0 / np.sqrt(2.0)
    p = np.stack([np.cos(X), np.sin(X), np.cos(Y), np.sin(Y)], axis=-1) * r
    return sphere_lift(p, grid), dict(willmore=True, constrained_willmore=True,
                                      isothermic=True)


def _zoo_cmc_torus(params, grid):
    # flat CMC torus in S^3: radii (r, s), conformal chart x in [0, 2 pi r)
    r = float(params.get("r", np.sqrt(0.4)))
    s = np.sqrt(1.0 - r * r)
    X, Y = grid.meshgrid()
    p = np.stack([r * np.cos(X / r), r * np.sin(X / r),
                  s * np.cos(Y / s), s * np.sin(Y / s)], axis=-1)
    return sphere_lift(p, grid), dict(willmore=False, constrained_willmore=True,
                                      isothermic=True)


def _zoo_cylinder(params, grid):
    X, Y = grid.meshgrid()
    f = np.stack([np.cos(X), np.sin(X), Y], axis=-1)
    return euclidean_lift(f, grid), dict(willmore=False, constrained_willmore=True,
                                         isothermic=True)


def _zoo_catenoid(params, grid):
    X, Y = grid.meshgrid()
    f = np.stack([np.cosh(Y) * np.cos(X), np.cosh(Y) * np.sin(X), Y], axis=-1)
    return euclidean_lift(f, grid), dict(willmore=True, constrained_willmore=True,
                                         isothermic=True)


def _zoo_perturbed(params, grid):
    eps = float(params.get("eps", 0.05))
    X, Y = grid.meshgrid()
    bump = eps * np.sin(X) * np.sin(2.0 * Y)
    f = np.stack([np.cos(X), np.sin(X), Y + bump], axis=-1)
    return euclidean_lift(f, grid), dict(willmore=False, constrained_willmore=False,
                                         isothermic=False)


_CATALOG = {
    "round_sphere_patch": (_zoo_round_sphere,
                           dict(x_min=-0.5, x_max=0.5, y_min=-0.5, y_max=0.5,
                                periodic_x=False, periodic_y=False)),
    "clifford_torus": (_zoo_clifford_torus,
                       dict(x_min=0.0, x_max=2 * np.pi, y_min=0.0, y_max=2 * np.pi,
                            periodic_x=True, periodic_y=True)),
    "cmc_patch": (_zoo_cmc_torus,
                  dict(x_min=0.0, x_max=2 * np.pi * np.sqrt(0.4),
                       y_min=0.0, y_max=2 * np.pi * np.sqrt(0.6),
                       periodic_x=True, periodic_y=True)),
    "cylinder": (_zoo_cylinder,
                 dict(x_min=0.0, x_max=2 * np.pi, y_min=0.0, y_max=1.0,
                      periodic_x=True, periodic_y=False)),
    "catenoid_patch": (_zoo_catenoid,
                       dict(x_min=0.0, x_max=2 * np.pi, y_min=-0.8, y_max=0.8,
                            periodic_x=True, periodic_y=False)),
    "perturbed": (_zoo_perturbed,
                  dict(x_min=0.0, x_max=2 * np.pi, y_min=0.0, y_max=1.0,
                       periodic_x=True, periodic_y=False)),
}

ZOO_NAMES = tuple(_CATALOG)


def default_grid(name, nx=65, ny=65):
    """The natural chart rectangle and periodicity of a catalog surface."""
    if name not in _CATALOG:
        raise UnknownSurface(f"no surface named {name!r}; know {sorted(_CATALOG)}")
    spec = _CATALOG[name][1]
    return ch.ChartGrid(spec["x_min"], spec["x_max"], spec["y_min"], spec["y_max"],
                        nx, ny, spec["periodic_x"], spec["periodic_y"])


def zoo(name, params=None, grid=None, nx=65, ny=65):
    """Build a catalog surface on its default grid (or a supplied one)."""
    if name not in _CATALOG:
        raise UnknownSurface(f"no surface named {name!r}; know {sorted(_CATALOG)}")
    builder, _ = _CATALOG[name]
    grid = grid or default_grid(name, nx, ny)
    params = dict(params or {})
    s, flags = builder(params, grid)
    return replace(s, name=name, params=params, flags=flags)


def zoo_euclidean_points(name, params, grid):
    """The raw parametrization used by the Euclidean oracle: returns
    (points array, ambient kind 'euclidean'|'sphere')."""
    s = zoo(name, params, grid)
    if name in ("clifford_torus", "cmc_patch"):
        return np.real(s.sigma[..., : s.n + 1]), "sphere"
    return np.real(s.sigma[..., : s.n]), "euclidean"
