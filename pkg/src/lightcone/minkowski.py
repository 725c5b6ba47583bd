"""Linear algebra over R^{n+1,1} and its complexification.

Vectors live in C^{n+2} with the bilinear (never Hermitian) inner product
of signature (+...+ -), timelike component last.  All operations broadcast
over leading axes, so a "field of vectors" is simply an array of shape
(..., m) and a field of endomorphisms an array of shape (..., m, m) with
m = n + 2.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrame, SingularMatrix


@dataclass(frozen=True)
class Signature:
    """Ambient signature data: vectors have n+2 components, the last one
    timelike."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"ambient sphere dimension must be >= 3, got {self.n}")

    @property
    def m(self):
        return self.n + 2

    @property
    def diag(self):
        """Diagonal of the metric Gram matrix: (+1, ..., +1, -1)."""
        g = np.ones(self.m)
        g[-1] = -1.0
        return g


def inner(u, v, g):
    """Bilinear inner product sum_i g_i u_i v_i, broadcasting over leading axes."""
    return np.sum(u * v * g, axis=-1)


def norm2(u, g):
    """Self inner product (complex in general)."""
    return inner(u, u, g)


def wedge(u, v, g):
    """Skew endomorphism w -> (u,w)v - (v,w)u as a matrix.

    Identified with u ^ v in the exterior square; metric-skew by construction.
    """
    gu = u * g
    gv = v * g
    return v[..., :, None] * gu[..., None, :] - u[..., :, None] * gv[..., None, :]


def metric_transpose(xi, g):
    """Adjoint with respect to the bilinear metric: (xi^t)_ab = g_a xi_ba g_b."""
    xt = np.swapaxes(xi, -1, -2)
    return g[:, None] * xt * g[None, :]


def morphism_inner(xi, eta, g):
    """Metric on endomorphisms: tr(eta^t xi)."""
    return np.einsum("...ba,...ba,a,b->...", eta, xi, g, g)


def skew_defect(xi, g):
    """Max-norm of xi + xi^t; zero iff xi is metric-skew."""
    return np.max(np.abs(xi + metric_transpose(xi, g)))


def orth_defect(T, g):
    """Max-norm of T^t T - I; zero iff T is complex-orthogonal for the metric."""
    m = T.shape[-1]
    prod = metric_transpose(T, g) @ T
    return np.max(np.abs(prod - np.eye(m)))


def orth_inverse(T, g):
    """Inverse of a metric-orthogonal matrix, T^{-1} = eta T^T eta."""
    return metric_transpose(T, g)


def adjoint(T, xi):
    """Ad_T(xi) = T xi T^{-1}.  T need not be orthogonal; uses a solve."""
    try:
        return T @ np.linalg.solve(np.swapaxes(T, -1, -2), np.swapaxes(xi, -1, -2)).swapaxes(-1, -2)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("adjoint by a singular matrix") from exc


def adjoint_orth(T, xi, g):
    """Ad_T(xi) for metric-orthogonal T, using the cheap inverse."""
    return T @ xi @ orth_inverse(T, g)


def gram(frame, g):
    """Gram matrix G_ij = (f_i, f_j) of a frame stacked as (..., k, m)."""
    return np.einsum("...ia,...ja,a->...ij", frame, frame, g)


def gram_projector(frame, g, cond_threshold=1e8):
    """Metric-orthogonal projector onto the span of a frame.

    pi(x) = sum_ij f_i (G^{-1})_ij (f_j, x).  Idempotent and metric
    self-adjoint whenever the Gram matrix is well conditioned.  Raises
    DegenerateFrame if the Gram condition number exceeds the threshold
    anywhere; the frame may contain null vectors as long as the full Gram
    stays invertible.
    """
    G = gram(frame, g)
    sv = np.linalg.svd(G, compute_uv=False)
    # scale-aware: an isotropic frame has an identically zero Gram, which a
    # pure ratio test would miss
    scale = np.maximum(np.max(np.sum(np.abs(frame) ** 2, axis=-1), axis=-1) ** 1,
                       np.finfo(float).tiny)
    cond = np.maximum(sv[..., 0], scale * np.finfo(float).eps) / np.maximum(
        sv[..., -1], np.finfo(float).tiny)
    worst = np.max(cond)
    if worst > cond_threshold:
        raise DegenerateFrame(
            f"frame Gram condition number {worst:.3e} exceeds {cond_threshold:.1e}"
        )
    Ginv = np.linalg.inv(G)
    return np.einsum("...ia,...ij,...jb,b->...ab", frame, Ginv, frame, g)


def reflection(projector):
    """Reflection across a subbundle: rho = pi - pi_perp = 2 pi - I."""
    m = projector.shape[-1]
    return 2.0 * projector - np.eye(m)


def newton_retraction(T, g, steps=3):
    """Opt-in retraction to the quadric T^t T = I.

    Iterates T <- (T + (T^t)^{-1})/2, whose fixed points are exactly the
    metric-orthogonal matrices.  Quadratic convergence for small drift.
    """
    X = np.asarray(T, dtype=complex)
    for _ in range(steps):
        try:
            inv_t = np.linalg.inv(metric_transpose(X, g))
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix("retraction of a singular matrix") from exc
        X = 0.5 * (X + inv_t)
    return X


def basis_vector(i, m, dtype=complex):
    e = np.zeros(m, dtype=dtype)
    e[i] = 1.0
    return e
