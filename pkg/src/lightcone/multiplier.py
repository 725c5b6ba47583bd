"""Recovery of constrained-Willmore multipliers by sparse least squares.

The multiplier ansatz

    q_z = -2 mu sigma ^ sigma_z - 2 nu sigma ^ sigma_zbar,   q_zbar = conj(q_z)

(normalized lift sigma) turns the constrained Willmore equation and the
closedness condition d^D q = 0 into a linear system for the complex scalar
fields (mu, nu).  Because conjugates of the unknowns appear, the system is
only real-linear: unknowns are split into real and imaginary parts and the
operator is assembled as a real sparse matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import chart as ch
from . import connection as cn
from . import minkowski as mk
from . import surface as sf
from .errors import IllPosed


def _expand_rows(C, grid):
    """Sparse (ncomp*npts, npts) matrix sending a scalar field u to the
    flattened field C * u, component-major rows (row = c*npts + p)."""
    npts = grid.npts
    flat = np.asarray(C).reshape(npts, -1)
    return sp.vstack([sp.diags(flat[:, c]) for c in range(flat.shape[1])],
                     format="csr")


def _realify(B, conj):
    """Real form of a complex block acting on split unknowns [Re u; Im u].

    conj=False represents u -> B u, conj=True represents u -> B conj(u).
    Output rows are [Re; Im] of the complex rows.
    """
    Br, Bi = B.real, B.imag
    if not conj:
        return sp.bmat([[Br, -Bi], [Bi, Br]], format="csr")
    return sp.bmat([[Br, Bi], [Bi, -Br]], format="csr")


@dataclass(frozen=True)
class Term:
    """One summand C * d(unknown or its conjugate) of a linear equation.

    unknown: index of the complex scalar field it multiplies
    C: coefficient field, any trailing value shape
    deriv: None, "z" or "zb" -- which derivative of the unknown appears
    conj: whether the conjugated unknown appears
    """

    unknown: int
    C: np.ndarray
    deriv: object = None
    conj: bool = False


def assemble(grid, equations, n_unknowns):
    """Real sparse operator for a list of equations, each a list of Terms.

    Unknown layout: columns [2k*npts, (2k+1)*npts) hold Re(u_k), the next
    npts columns Im(u_k).
    """
    Dz, Dzb = ch.diff_matrices(grid)
    stencil = {None: sp.identity(grid.npts, format="csr"), "z": Dz, "zb": Dzb}
    rows = []
    for eq in equations:
        blocks = [None] * n_unknowns
        for term in eq:
            B = _expand_rows(term.C, grid) @ stencil[term.deriv]
            R = _realify(B, term.conj)
            k = term.unknown
            blocks[k] = R if blocks[k] is None else blocks[k] + R
        rows.append(blocks)
    return sp.bmat(rows, format="csr")


def field_rhs(F, grid):
    """Stacked real right-hand-side vector matching assemble()'s row order."""
    flat = np.asarray(F).reshape(grid.npts, -1).T.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def rhs_to_fields(u, grid, n_unknowns):
    """Split a solution vector back into complex scalar fields."""
    npts = grid.npts
    fields = []
    for k in range(n_unknowns):
        re = u[2 * k * npts:(2 * k + 1) * npts]
        im = u[(2 * k + 1) * npts:(2 * k + 2) * npts]
        fields.append((re + 1j * im).reshape(grid.nx, grid.ny))
    return fields


def lstsq_solve(M, b, ridge=1e-12):
    """Minimum of |M u - b| by regularized normal equations (sparse LU)."""
    K = (M.T @ M).tocsc()
    scale = np.mean(K.diagonal())
    if not np.isfinite(scale) or scale <= 0:
        raise IllPosed("empty or non-finite least-squares operator")
    lu = spla.splu(K + ridge * scale * sp.identity(K.shape[0], format="csc"))
    u = lu.solve(M.T @ b)
    residual = float(np.linalg.norm(M @ u - b))
    return u, residual


def smallest_spectrum(M, k=4):
    """The k smallest and the largest singular values of M (via M^T M)."""
    K = (M.T @ M).tocsc()
    scale = np.mean(K.diagonal())
    lam_max = spla.eigsh(K, k=1, which="LA",
                         return_eigenvectors=False)[0]
    vals, vecs = spla.eigsh(K + 1e-14 * scale * sp.identity(K.shape[0], format="csc"),
                            k=k, sigma=0.0, which="LM")
    order = np.argsort(vals)
    vals = np.clip(vals[order], 0.0, None)
    return np.sqrt(vals), np.sqrt(lam_max), vecs[:, order]


def _multiplier_equations(s, N, sn):
    """Equations E1 (constrained Willmore) and E2 (closedness) as Terms
    in the unknowns mu (0) and nu (1)."""
    g = s.g
    P = -2.0 * mk.wedge(sn.sigma, sn.sigma_z, g)
    Q = -2.0 * mk.wedge(sn.sigma, sn.sigma_zb, g)
    Pc, Qc = np.conj(P), np.conj(Q)
    Nz, Nzb = N.wz, N.wzb

    def comm(a, b):
        return a @ b - b @ a

    # E1: W - 2i[q_z, N_zbar] - 2i[q_zbar, N_z] = 0
    e1 = [
        Term(0, -2j * comm(P, Nzb)),
        Term(1, -2j * comm(Q, Nzb)),
        Term(0, -2j * comm(Pc, Nz), conj=True),
        Term(1, -2j * comm(Qc, Nz), conj=True),
    ]
    # E2: dz q_zbar - dzbar q_z + [N_zbar, q_z] - [N_z, q_zbar] = 0
    dzbP = ch.diff_zbar(P, s.grid)
    dzbQ = ch.diff_zbar(Q, s.grid)
    dzPc = ch.diff_z(Pc, s.grid)
    dzQc = ch.diff_z(Qc, s.grid)
    e2 = [
        Term(0, -P, deriv="zb"),
        Term(0, -dzbP + comm(Nzb, P)),
        Term(1, -Q, deriv="zb"),
        Term(1, -dzbQ + comm(Nzb, Q)),
        Term(0, Pc, deriv="z", conj=True),
        Term(0, dzPc - comm(Nz, Pc), conj=True),
        Term(1, Qc, deriv="z", conj=True),
        Term(1, dzQc - comm(Nz, Qc), conj=True),
    ]
    return [e1, e2], P, Q


@dataclass(frozen=True)
class MultiplierFit:
    """Recovered multiplier with diagnostics.

    residual: least-squares residual |M u - b|
    rel_residual: residual / |b|
    kernel_svals: smallest singular values of the homogeneous operator
    sigma_max: largest singular value (scale for kernel decisions)
    """

    q: ch.OneForm
    mu: np.ndarray
    nu: np.ndarray
    residual: float
    rel_residual: float
    kernel_svals: np.ndarray
    sigma_max: float

    def kernel_dim(self, rtol=1e-6):
        return int(np.sum(self.kernel_svals <= rtol * self.sigma_max))


def recover_multiplier(s, N=None, ridge=1e-12, spectrum_k=4):
    """Fit (mu, nu) so that q makes the surface constrained Willmore.

    A small relative residual certifies the surface as constrained Willmore
    at the grid resolution; the kernel of the homogeneous operator measures
    non-uniqueness of the multiplier (isothermic surfaces have kernel).
    """
    if N is None:
        N = cn.second_form(s)
    sn = sf.normalized_lift(s)
    eqs, P, Q = _multiplier_equations(s, N, sn)
    M = assemble(s.grid, eqs, 2)
    W = cn.willmore_residual(s, N)
    b = np.concatenate([field_rhs(-W, s.grid),
                        np.zeros(2 * s.grid.npts * s.m * s.m)])
    u, res = lstsq_solve(M, b, ridge)
    mu, nu = rhs_to_fields(u, s.grid, 2)
    qz = mu[..., None, None] * P + nu[..., None, None] * Q
    q = ch.OneForm(qz, np.conj(qz))
    svals, smax, _ = smallest_spectrum(M, k=spectrum_k)
    bn = np.linalg.norm(b)
    # on an exactly Willmore surface b is numerically zero and q = 0 is an
    # exact fit; fall back to the operator scale so 0/0 does not report junk
    scale = max(bn, 1e-6 * smax)
    return MultiplierFit(q=q, mu=mu, nu=nu, residual=res,
                         rel_residual=res / scale if scale > 0 else res,
                         kernel_svals=svals, sigma_max=smax)
