"""Isothermic detection and the structure of the multiplier space.

A surface is isothermic exactly when a nonzero closed real 1-form eta with
values in Lambda ^ Lambda^(1) exists.  With the same two-coefficient ansatz
as the multiplier, closedness splits into the pair

    d^D eta = 0   and   [Npart ^ eta] = 0,

a homogeneous real-linear system whose smallest relative singular value is
the isothermic residual: it converges to zero like h^2 on isothermic
surfaces and stays bounded away from zero otherwise.
"""

from dataclasses import dataclass

import numpy as np

from . import chart as ch
from . import connection as cn
from . import gauge as gg
from . import minkowski as mk
from . import multiplier as mp
from . import surface as sf

# calibration constant for the h^2 verdict threshold, shared by eta_solve
# and the multiplier-kernel decision
ISOTHERMIC_C = 1.0


def _comm(a, b):
    return a @ b - b @ a


def _eta_equations(s, N, sn):
    """Closedness pair as Terms in the unknowns mu (0), nu (1) of
    eta_z = mu P + nu Q, eta_zbar = conj(eta_z)."""
    g = s.g
    P = -2.0 * mk.wedge(sn.sigma, sn.sigma_z, g)
    Q = -2.0 * mk.wedge(sn.sigma, sn.sigma_zb, g)
    Pc, Qc = np.conj(P), np.conj(Q)
    Nz, Nzb = N.wz, N.wzb
    dzbP = ch.diff_zbar(P, s.grid)
    dzbQ = ch.diff_zbar(Q, s.grid)
    dzPc = ch.diff_z(Pc, s.grid)
    dzQc = ch.diff_z(Qc, s.grid)
    # d^D eta = dz eta_zb - dzb eta_z + [N_zb, eta_z] - [N_z, eta_zb]
    closed = [
        mp.Term(0, -P, deriv="zb"),
        mp.Term(0, -dzbP + _comm(Nzb, P)),
        mp.Term(1, -Q, deriv="zb"),
        mp.Term(1, -dzbQ + _comm(Nzb, Q)),
        mp.Term(0, Pc, deriv="z", conj=True),
        mp.Term(0, dzPc - _comm(Nz, Pc), conj=True),
        mp.Term(1, Qc, deriv="z", conj=True),
        mp.Term(1, dzQc - _comm(Nz, Qc), conj=True),
    ]
    # [N ^ eta] = [N_z, eta_zb] - [N_zb, eta_z]
    bracket = [
        mp.Term(0, _comm(Nz, Pc), conj=True),
        mp.Term(1, _comm(Nz, Qc), conj=True),
        mp.Term(0, -_comm(Nzb, P)),
        mp.Term(1, -_comm(Nzb, Q)),
    ]
    return [closed, bracket], P, Q


@dataclass(frozen=True)
class EtaFit:
    """Minimizer of the closedness pair on the unit sphere of coefficients."""

    eta: ch.OneForm
    mu: np.ndarray
    nu: np.ndarray
    residual: float
    sigma_min: float
    sigma_max: float

    def verdict(self, grid, C=ISOTHERMIC_C):
        return self.residual <= C * grid.h ** 2


def eta_solve(s, N=None, spectrum_k=2):
    """Best candidate for the closed form eta and its relative residual
    sigma_min / sigma_max of the discrete closedness operator."""
    if N is None:
        N = cn.second_form(s)
    sn = sf.normalized_lift(s)
    eqs, P, Q = _eta_equations(s, N, sn)
    M = mp.assemble(s.grid, eqs, 2)
    svals, smax, vecs = mp.smallest_spectrum(M, k=spectrum_k)
    u = vecs[:, 0]
    u = u / np.linalg.norm(u)
    mu, nu = mp.rhs_to_fields(u, s.grid, 2)
    etaz = mu[..., None, None] * P + nu[..., None, None] * Q
    eta = ch.OneForm(etaz, np.conj(etaz))
    return EtaFit(eta=eta, mu=mu, nu=nu,
                  residual=float(svals[0] / smax),
                  sigma_min=float(svals[0]), sigma_max=float(smax))


def bracket_identity_defect(N, eta):
    """Max-norm of [Npart ^ eta] - [*eta ^ *Npart]; zero by pure algebra."""
    lhs = ch.wedge_bracket(N, eta)
    rhs = ch.wedge_bracket(eta.star(), N.star())
    return float(np.max(np.abs(lhs - rhs)))


def multiplier_space(s, q, eta, N=None, t_samples=(-1.0, -0.1, 0.1, 1.0)):
    """Probe the affine line q + t (*eta) of multiplier candidates.

    Returns per-t interior max-norms of the constrained residual and of the
    closedness d^D of the shifted multiplier, plus the algebraic bracket
    identity defect.
    """
    if N is None:
        N = cn.second_form(s)
    mask = s.grid.interior_mask()
    star_eta = eta.star()
    rows = []
    for t in t_samples:
        qt = q + float(t) * star_eta
        res = cn.constrained_residual(s, qt, N)
        closed = cn.multiplier_closedness(s, qt, N)
        rows.append({
            "t": float(t),
            "constrained_residual": ch.masked_max(res, mask),
            "closedness": ch.masked_max(closed, mask),
        })
    return {
        "samples": rows,
        "bracket_identity_defect": bracket_identity_defect(N, eta),
    }


def membership_defect(eta, s_prime):
    """Distance of a form from the pointwise span of the Lambda ^ Lambda^(1)
    ansatz wedges of another surface (relative Frobenius residual)."""
    sn = sf.normalized_lift(s_prime)
    g = s_prime.g
    P = -2.0 * mk.wedge(sn.sigma, sn.sigma_z, g)
    Q = -2.0 * mk.wedge(sn.sigma, sn.sigma_zb, g)
    defect = 0.0
    for w in (eta.wz, eta.wzb):
        B = np.stack([P, Q], axis=-3).reshape(P.shape[:-2] + (2, -1))
        y = w.reshape(w.shape[:-2] + (-1,))
        G = np.einsum("...ik,...jk->...ij", B, np.conj(B))
        rhs = np.einsum("...ik,...k->...i", np.conj(B), y)
        coef = np.linalg.solve(np.conj(G), rhs[..., None])[..., 0]
        fit = np.einsum("...i,...ik->...k", coef, B)
        num = np.linalg.norm((y - fit).reshape(-1))
        den = np.linalg.norm(y.reshape(-1))
        defect = max(defect, num / den if den > 0 else 0.0)
    return float(defect)


def eta_deform_check(s, eta, lam, deformed, N_new=None):
    """Transport eta through a spectral deformation and re-test it.

    eta_lambda = lambda^{-1} eta^{1,0} + lambda eta^{0,1} is pushed through
    the deformation gauge; returns its reality defect, the membership
    defect relative to the deformed surface, and the interior max-norms of
    the split closedness pair on the deformed surface.
    """
    lam = complex(lam)
    eta_lam = ch.OneForm(eta.wz / lam, eta.wzb * lam)
    phi = deformed.phi
    phi_inv = mk.orth_inverse(phi, s.g)
    eta_new = gg.adjoint_form(phi, eta_lam, phi_inv)
    s_new = deformed.surface
    if N_new is None:
        N_new = cn.second_form(s_new)
    mask = s_new.grid.interior_mask()
    d_closed = ch.exterior_d(eta_new, s_new.grid,
                             connection=cn.d_connection(N_new))
    bracket = ch.wedge_bracket(N_new, eta_new)
    return {
        "reality_defect": float(eta_new.reality_defect()),
        "membership_defect": membership_defect(eta_new, s_new),
        "closedness": ch.masked_max(d_closed, mask),
        "bracket": ch.masked_max(bracket, mask),
    }
