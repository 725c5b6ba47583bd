"""Trivialization of flat connections, gauge transforms and spectral
deformation.

A connection d + A with small curvature is trivialized along grid lines:
phi solves d phi = phi A with phi = I at the basepoint (0, 0), integrated
first along the x-row through the basepoint and then along y-columns.  Each
step uses a fourth-order commutator-corrected exponential update with the
connection sampled at two Gauss points by cubic interpolation.  phi then
intertwines d + A with the trivial connection: d(phi s) = phi (d + A) s.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import chart as ch
from . import connection as cn
from . import minkowski as mk
from . import surface as sf
from .errors import NotFlat, SeedInvalid

_GAUSS = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)


def _lagrange_weights(t, offsets):
    w = np.empty(len(offsets))
    for i, xi in enumerate(offsets):
        num = 1.0
        for j, xj in enumerate(offsets):
            if j != i:
                num *= (t - xj) / (xi - xj)
        w[i] = num
    return w


def _sample_gauss(Anodes, k, t, periodic):
    """Cubic interpolation of node samples at index-coordinate k + t."""
    n = Anodes.shape[0]
    if periodic:
        idx = np.arange(k - 1, k + 3) % n
        offsets = (-1.0, 0.0, 1.0, 2.0)
    elif k == 0:
        idx = np.arange(0, 4)
        offsets = (0.0, 1.0, 2.0, 3.0)
    elif k == n - 2:
        idx = np.arange(n - 4, n)
        offsets = (-2.0, -1.0, 0.0, 1.0)
    else:
        idx = np.arange(k - 1, k + 3)
        offsets = (-1.0, 0.0, 1.0, 2.0)
    w = _lagrange_weights(t, offsets)
    return np.einsum("s,s...->...", w, Anodes[idx])


def _transport_steps(Anodes, h, periodic):
    """Transfer matrices T_k with phi_{k+1} = phi_k T_k for d phi = phi A.

    Anodes has shape (n, ..., m, m); returns (nsteps, ..., m, m) with
    nsteps = n for a periodic line (closing the loop) and n - 1 otherwise.
    """
    n = Anodes.shape[0]
    nsteps = n if periodic else n - 1
    steps = np.empty((nsteps,) + Anodes.shape[1:], dtype=complex)
    for k in range(nsteps):
        A1 = _sample_gauss(Anodes, k, _GAUSS[0], periodic)
        A2 = _sample_gauss(Anodes, k, _GAUSS[1], periodic)
        omega = 0.5 * h * (A1 + A2) + (np.sqrt(3.0) / 12.0) * h * h * (
            A1 @ A2 - A2 @ A1)
        steps[k] = sla.expm(omega)
    return steps


@dataclass(frozen=True)
class Trivialization:
    """Gauge field phi (nx, ny, m, m) with phi(0,0) = I, plus the holonomy
    around each periodic axis (identity on non-periodic axes)."""

    phi: np.ndarray
    monodromy_x: np.ndarray
    monodromy_y: np.ndarray

    def inverse_orth(self, g):
        return mk.orth_inverse(self.phi, g)


def _xy_components(A):
    return A.wz + A.wzb, 1j * (A.wz - A.wzb)


def trivialize(A, grid, order="xy"):
    """Solve d phi = phi A along grid lines from the basepoint.

    order='xy' integrates the basepoint row first, then all columns;
    'yx' does the transpose.  On periodic axes integration proceeds on the
    universal cover, and the full-period holonomy is reported.
    """
    Ax, Ay = _xy_components(A)
    m = Ax.shape[-1]
    eye = np.eye(m, dtype=complex)
    if order == "yx":
        t = trivialize(_transpose_form(A), _transpose_grid(grid), order="xy")
        return Trivialization(np.swapaxes(t.phi, 0, 1),
                              t.monodromy_y, t.monodromy_x)

    nx, ny = grid.nx, grid.ny
    phi = np.empty((nx, ny, m, m), dtype=complex)

    row_steps = _transport_steps(Ax[:, 0], grid.hx, grid.periodic_x)
    phi[0, 0] = eye
    for i in range(nx - 1):
        phi[i + 1, 0] = phi[i, 0] @ row_steps[i]
    if grid.periodic_x:
        monodromy_x = phi[nx - 1, 0] @ row_steps[nx - 1]
    else:
        monodromy_x = eye.copy()

    col_nodes = np.swapaxes(Ay, 0, 1)  # (ny, nx, m, m)
    col_steps = _transport_steps(col_nodes, grid.hy, grid.periodic_y)
    for j in range(ny - 1):
        phi[:, j + 1] = phi[:, j] @ col_steps[j]
    if grid.periodic_y:
        monodromy_y = phi[0, ny - 1] @ col_steps[ny - 1, 0]
    else:
        monodromy_y = eye.copy()
    return Trivialization(phi, monodromy_x, monodromy_y)


def _transpose_grid(grid):
    return ch.ChartGrid(grid.y_min, grid.y_max, grid.x_min, grid.x_max,
                        grid.ny, grid.nx, grid.periodic_y, grid.periodic_x)


def _transpose_form(A):
    # swap the roles of x and y: in the transposed chart w = y + ix the
    # x-component becomes the new y-component and vice versa
    Ax, Ay = _xy_components(A)
    Bx = np.swapaxes(Ay, 0, 1)
    By = np.swapaxes(Ax, 0, 1)
    return ch.OneForm(0.5 * (Bx - 1j * By), 0.5 * (Bx + 1j * By))


def path_defect(A, grid):
    """Max difference between row-first and column-first trivializations;
    an O(h^2)-consistent measure of path dependence (non-flatness)."""
    t1 = trivialize(A, grid, order="xy")
    t2 = trivialize(A, grid, order="yx")
    return float(np.max(np.abs(t1.phi - t2.phi)))


def require_flat(A, grid, tol):
    defect = path_defect(A, grid)
    if defect > tol:
        raise NotFlat(f"path-independence defect {defect:.3e} exceeds {tol:.1e}")
    return defect


def conjugate_connection(A, phi, grid):
    """Gauge transform of coefficients: A' = phi A phi^{-1} - (d phi) phi^{-1}.

    With phi a trivialization of d + A this vanishes up to the O(h^2)
    stencil error of d phi.
    """
    phi_inv = np.linalg.inv(phi)
    dz = ch.diff_z(phi, grid)
    dzb = ch.diff_zbar(phi, grid)
    return ch.OneForm(
        phi @ A.wz @ phi_inv - dz @ phi_inv,
        phi @ A.wzb @ phi_inv - dzb @ phi_inv,
    )


def adjoint_form(phi, w, phi_inv=None):
    """Pointwise Ad_phi applied to an endomorphism-valued 1-form."""
    if phi_inv is None:
        phi_inv = np.linalg.inv(phi)
    return ch.OneForm(phi @ w.wz @ phi_inv, phi @ w.wzb @ phi_inv)


# ---------------------------------------------------------------------------
# parallel line bundles and their seeds


def transport_seed(s, projector=None, rng_seed=0):
    """A null vector l at the basepoint with (l, rho l) != 0, where rho is
    the reflection across the central sphere congruence.

    Built as l = a + i b + i sqrt(2) w0 with a, b an orthonormal
    spacelike/timelike pair inside S at the basepoint and w0 a unit vector
    of S-perp; then (l, l) = 0 and (l, rho l) = 4 exactly.  The spacelike
    direction a is drawn pseudorandomly from the spacelike 3-space of S.
    """
    pi = projector if projector is not None else cn.congruence_projector(s)
    pi0 = np.real(np.asarray(pi)[0, 0])
    g = s.g
    rng = np.random.default_rng(rng_seed)
    # Euclidean-orthonormal spanning sets of S and S-perp at the basepoint
    u, sv, _ = np.linalg.svd(pi0)
    if sv[3] < 1e-8 or sv[4] > 1e-8:
        raise SeedInvalid("congruence projector is not rank 4 at the basepoint")
    F = u[:, :4].T
    # u[:, 4] is the Euclidean complement of S; the metric complement is g u
    perp = g * u[:, 4]
    # diagonalize the (3,1) metric restricted to S
    G = np.real(mk.gram(F.astype(complex), g))
    w, V = np.linalg.eigh(G)
    if w[0] >= 0 or w[1] <= 0:
        raise SeedInvalid("congruence is not signature (3,1) at the basepoint")
    b = (F.T @ V[:, 0]) / np.sqrt(-w[0])
    space = F.T @ (V[:, 1:] / np.sqrt(w[1:]))
    coeff = rng.standard_normal(3)
    a = space @ (coeff / np.linalg.norm(coeff))
    n2p = np.real(mk.norm2(perp.astype(complex), g))
    if n2p <= 1e-12:
        raise SeedInvalid("degenerate complement at the basepoint")
    w0 = perp / np.sqrt(n2p)
    l = a.astype(complex) + 1j * b + 1j * np.sqrt(2.0) * w0
    validate_seed(l, pi0, g)
    return l


def pointwise_line_field(s, projector=None, rng_seed=0):
    """The seed recipe applied at every grid point: a null line field with
    (l, rho l) = |l|^2 exactly, ideal conditioning for factor-algebra tests.

    Unlike a transported line it is not parallel for any connection (and not
    even continuous in general); it exercises the pointwise factor algebra
    on maximally well-conditioned inputs.
    """
    pi = projector if projector is not None else cn.congruence_projector(s)
    pi_r = np.real(pi)
    g = s.g
    u, sv, _ = np.linalg.svd(pi_r)
    F = np.swapaxes(u[..., :4], -1, -2)
    perp = g * u[..., 4]
    G = np.real(mk.gram(F.astype(complex), g))
    w, V = np.linalg.eigh(G)
    if np.max(w[..., 0]) >= 0 or np.min(w[..., 1]) <= 0:
        raise SeedInvalid("congruence is not signature (3,1) everywhere")
    b = np.einsum("...km,...k->...m", F, V[..., 0]) / np.sqrt(-w[..., 0, None])
    space = np.einsum("...km,...kj->...mj", F, V[..., 1:] / np.sqrt(w[..., None, 1:]))
    rng = np.random.default_rng(rng_seed)
    coeff = rng.standard_normal(3)
    coeff = coeff / np.linalg.norm(coeff)
    a = space @ coeff
    n2p = np.real(mk.norm2(perp.astype(complex), g))
    w0 = perp / np.sqrt(n2p)[..., None]
    return a.astype(complex) + 1j * b + 1j * np.sqrt(2.0) * w0


def validate_seed(l, pi0, g, tol=1e-8):
    rho = mk.reflection(pi0)
    null = abs(mk.norm2(l, g))
    pair = abs(mk.inner(l, rho @ l, g))
    scale = float(np.sum(np.abs(l) ** 2))
    if null > tol * scale:
        raise SeedInvalid(f"seed is not null: |(l,l)| = {null:.3e}")
    if pair < tol * scale:
        raise SeedInvalid(f"(l, rho l) = {pair:.3e} is too close to zero")


def parallel_line(triv, seed):
    """The d+A-parallel line field through the seed: l(p) = phi(p)^{-1} l0,
    normalized pointwise for conditioning."""
    vec = np.linalg.solve(triv.phi, np.broadcast_to(
        seed, triv.phi.shape[:-2] + seed.shape).copy()[..., None])[..., 0]
    nrm = np.linalg.norm(vec, axis=-1, keepdims=True)
    return vec / nrm


# ---------------------------------------------------------------------------
# spectral deformation


@dataclass(frozen=True)
class Deformed:
    """Result of a spectral deformation: the new surface, the transported
    multiplier, and the gauge that produced them."""

    surface: "sf.SurfaceData"
    q: ch.OneForm
    phi: np.ndarray
    lam: complex


def deformed_second_form(N, lam, phi, phi_inv=None):
    """Exact S-swapping form of the lambda-deformed bundle,
    Ad_phi(lambda^{-1} N^{1,0} + lambda N^{0,1}) — no grid differentiation."""
    lam = complex(lam)
    return adjoint_form(phi, ch.OneForm(N.wz / lam, N.wzb * lam), phi_inv)


def semigroup_defect(s, lam, mu, q=None, N=None):
    """Constancy defect of the discrepancy field between deforming by
    lambda then mu (at the bundle level, with exactly transported
    coefficients) and deforming by lambda*mu in one step.

    The field Q = psi phi (phi^{lambda mu})^{-1} is constant when the
    families satisfy the composition rule; its deviation from the basepoint
    value isolates the transport error.
    """
    lam, mu = complex(lam), complex(mu)
    if N is None:
        N = cn.second_form(s)
    phi = trivialize(cn.family_connection(lam, N, q), s.grid).phi
    phi_inv = mk.orth_inverse(phi, s.g)
    Nd = deformed_second_form(N, lam, phi, phi_inv)
    qd = adjoint_form(phi, deformed_multiplier(q, lam), phi_inv) if q is not None else None
    A2 = cn.family_connection(mu, Nd, qd)
    # the deformed coefficients live on the universal cover: no wrapped
    # interpolation when integrating them
    psi = trivialize(A2, s.grid.open_copy()).phi
    phi_lm = trivialize(cn.family_connection(lam * mu, N, q), s.grid).phi
    Q = psi @ phi @ mk.orth_inverse(phi_lm, s.g)
    Q0 = Q[0, 0]
    defect = float(np.max(np.abs(Q - Q0)) / np.max(np.abs(Q0)))
    return defect, Q


def deformed_multiplier(q, lam):
    """q_lambda = lambda^{-2} q^{1,0} + lambda^2 q^{0,1} (before the gauge)."""
    lam = complex(lam)
    return ch.OneForm(q.wz / lam ** 2, q.wzb * lam ** 2)


def spectral_deform(s, lam, q=None, N=None):
    """Deform by trivializing d^lambda and pushing the lift through the gauge.

    lambda = 1 is the identity: the input surface object is returned as-is.
    For |lambda| = 1 the connection is real and so is the deformed surface.
    """
    lam = complex(lam)
    if lam == 1:
        qt = q if q is not None else ch.zero_form(s.grid, (s.m, s.m))
        eye = np.broadcast_to(np.eye(s.m, dtype=complex),
                              (s.grid.nx, s.grid.ny, s.m, s.m))
        return Deformed(surface=s, q=qt, phi=eye, lam=lam)
    if N is None:
        N = cn.second_form(s)
    A = cn.family_connection(lam, N, q)
    triv = trivialize(A, s.grid)
    phi = triv.phi
    sigma_new = (phi @ s.sigma[..., None])[..., 0]
    # the deformed lift lives on the universal cover (period problem), so
    # its derivatives must not wrap around periodic seams
    s_new = sf.SurfaceData.from_lift(s.grid.open_copy(), s.n, sigma_new,
                                     name=s.name + "@deform", params=s.params)
    phi_inv = mk.orth_inverse(phi, s.g)
    if q is not None:
        q_new = adjoint_form(phi, deformed_multiplier(q, lam), phi_inv)
    else:
        q_new = None
    return Deformed(surface=s_new, q=q_new, phi=phi, lam=lam)
