"""The flat-connection family attached to a surface.

The central sphere congruence splits the trivial connection as d = D + Npart
with D preserving the congruence S and its complement and Npart swapping
them.  Willmore-type residuals, the conserved energy and the lambda-family

    A^lambda_z    = (1/lambda - 1)   Npart_z    + (1/lambda^2 - 1) q_z
    A^lambda_zbar = (lambda - 1)     Npart_zbar + (lambda^2 - 1)   q_zbar

are all expressed through the projector onto S, so every quantity here is
invariant under rescaling the lift.
"""

import numpy as np

from . import chart as ch
from . import minkowski as mk
from . import surface as sf
from .errors import ZeroLambda


def congruence_projector(s, cond_threshold=1e8):
    """Metric-orthogonal projector field onto the central sphere congruence."""
    return sf.central_sphere(s, cond_threshold).projector(cond_threshold)


def second_form(s, projector=None):
    """The S-swapping part of the trivial connection, as an endomorphism-valued
    1-form: Npart_X = [d_X pi, pi]."""
    pi = congruence_projector(s) if projector is None else projector
    return OneFormFromProjector(pi, s.grid)


def OneFormFromProjector(pi, grid):
    return ch.OneForm(
        _proj_bracket(ch.diff_z(pi, grid), pi),
        _proj_bracket(ch.diff_zbar(pi, grid), pi),
    )


def _proj_bracket(dpi, pi):
    return dpi @ pi - pi @ dpi


def d_connection(N):
    """Coefficients of D = d - Npart relative to the trivial connection."""
    return -1.0 * N


def energy_density(N, g):
    """Density (Npart_z, Npart_zbar) against dx dy.

    Integrating it gives half the area integral of |II^0|^2: the conformally
    invariant Willmore functional in its classical normalization.
    """
    return np.real(mk.morphism_inner(N.wz, N.wzb, g))


def willmore_energy(s, N=None):
    """Willmore energy of the surface (classical normalization; equals
    2 pi^2 on the minimal Clifford torus)."""
    if N is None:
        N = second_form(s)
    return float(ch.integrate(energy_density(N, s.g), s.grid))


def pointwise_tracefree2(s, N=None):
    """|II^0|^2 reconstructed from the congruence:  (1/2)|Npart|^2 with the
    metric induced by the space-form-projected lift.

    Returns (field, conformal factor e^{2u}); e^{2u} = 2 (sigma_z, sigma_zbar)
    of the projected lift.
    """
    if N is None:
        N = second_form(s)
    dens = energy_density(N, s.g)
    pairing = 2.0 * np.real(mk.inner(s.sigma_z, s.sigma_zb, s.g))
    return 2.0 * dens / pairing, pairing


def willmore_residual(s, N=None):
    """dz^dzbar coefficient of d^D (*Npart): zero exactly on Willmore
    surfaces."""
    if N is None:
        N = second_form(s)
    return ch.exterior_d(N.star(), s.grid, connection=d_connection(N))


def constrained_residual(s, q, N=None):
    """Residual of the constrained Willmore equation with multiplier q:
    d^D (*Npart) - 2 [q ^ *Npart]."""
    if N is None:
        N = second_form(s)
    W = willmore_residual(s, N)
    return W - 2.0 * ch.wedge_bracket(q, N.star())


def multiplier_closedness(s, q, N=None):
    """dz^dzbar coefficient of d^D q; a genuine multiplier is D-closed."""
    if N is None:
        N = second_form(s)
    return ch.exterior_d(q, s.grid, connection=d_connection(N))


def family_connection(lam, N, q=None):
    """Coefficients of d^lambda relative to the trivial connection.

    q=None means the plain Willmore family (q = 0).  lambda = 1 returns the
    zero form exactly.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("the connection family has a pole at lambda = 0")
    wz = (1.0 / lam - 1.0) * N.wz
    wzb = (lam - 1.0) * N.wzb
    if q is not None:
        wz = wz + (1.0 / lam ** 2 - 1.0) * q.wz
        wzb = wzb + (lam ** 2 - 1.0) * q.wzb
    return ch.OneForm(wz, wzb)


def curvature(A, grid):
    """dz^dzbar coefficient of F = dA + A ^ A for coefficients relative to d."""
    return (ch.diff_z(A.wzb, grid) - ch.diff_zbar(A.wz, grid)
            + A.wz @ A.wzb - A.wzb @ A.wz)


def structure_gauss(s, N=None):
    """Gauss-type structure residual: R^D + Npart ^ Npart, which vanishes
    because the trivial connection is flat."""
    if N is None:
        N = second_form(s)
    D = d_connection(N)
    RD = curvature(D, s.grid)
    return RD + N.wz @ N.wzb - N.wzb @ N.wz


def structure_codazzi(s, N=None):
    """Codazzi-type structure residual: d^D Npart, the S-swapping part of the
    flatness of d."""
    if N is None:
        N = second_form(s)
    return ch.exterior_d(N, s.grid, connection=d_connection(N))


def flatness_defect(A, grid, margin=2):
    """(max, L2) norms of the curvature of d + A over the interior mask."""
    F = curvature(A, grid)
    mask = grid.interior_mask(margin)
    return ch.masked_max(F, mask), ch.masked_l2(F, grid, mask)


def hopf_multiplier(s, mu, nu, normalized=None):
    """Multiplier candidate built from the normalized lift:

        q_z = -2 mu sigma ^ sigma_z - 2 nu sigma ^ sigma_zbar,
        q_zbar = conj(q_z),

    for complex scalar fields mu, nu.  Values lie in Lambda ^ Lambda^(1),
    so q annihilates S-perp and maps S into Lambda.
    """
    sn = normalized if normalized is not None else sf.normalized_lift(s)
    P = -2.0 * mk.wedge(sn.sigma, sn.sigma_z, s.g)
    Q = -2.0 * mk.wedge(sn.sigma, sn.sigma_zb, s.g)
    qz = mu[..., None, None] * P + nu[..., None, None] * Q
    return ch.OneForm(qz, np.conj(qz))
