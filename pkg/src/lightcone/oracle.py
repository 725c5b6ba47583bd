"""Classical differential-geometry oracle for codimension-one surfaces.

Computes fundamental forms, curvatures and the trace-free second fundamental
form directly from a parametrization — in flat R^3 or inside the round
S^3 subset R^4 — with no reference to the light-cone machinery.  Used as an
independent cross-check of everything built on lifts.
"""

from dataclasses import dataclass

import numpy as np

from . import chart as ch


@dataclass(frozen=True)
class ClassicalData:
    """Pointwise classical invariants of an immersed surface patch.

    first: first fundamental form, shape (nx, ny, 2, 2)
    second: scalar second fundamental form against the unit normal
    mean: mean curvature H = tr_g(second) / 2
    gauss: extrinsic Gauss curvature det(second) / det(first)
    tracefree2: |second - H g|^2 contracted with g, i.e. |II^0|^2
    area_density: sqrt(det first)
    ambient_curvature: 0 for flat R^3, +1 inside S^3
    """

    first: np.ndarray
    second: np.ndarray
    normal: np.ndarray
    mean: np.ndarray
    gauss: np.ndarray
    tracefree2: np.ndarray
    area_density: np.ndarray
    ambient_curvature: float

    @property
    def intrinsic_gauss(self):
        return self.ambient_curvature + self.gauss

    def conformality_defect(self):
        """Max of |g11 - g22| + 2|g12| over the grid, relative to the
        conformal factor; zero for a conformal chart."""
        g = self.first
        num = np.abs(g[..., 0, 0] - g[..., 1, 1]) + 2.0 * np.abs(g[..., 0, 1])
        den = 0.5 * (g[..., 0, 0] + g[..., 1, 1])
        return float(np.max(num / den))


def _first_form(fx, fy):
    E = np.sum(fx * fx, axis=-1)
    F = np.sum(fx * fy, axis=-1)
    G = np.sum(fy * fy, axis=-1)
    g = np.empty(E.shape + (2, 2))
    g[..., 0, 0] = E
    g[..., 0, 1] = F
    g[..., 1, 0] = F
    g[..., 1, 1] = G
    return g


def _invariants(first, second, ambient_curvature, normal):
    det_g = first[..., 0, 0] * first[..., 1, 1] - first[..., 0, 1] ** 2
    ginv = np.linalg.inv(first)
    # shape operator trace and norms via index raising
    mean = 0.5 * np.einsum("...ij,...ij->...", ginv, second)
    norm2 = np.einsum("...ik,...jl,...ij,...kl->...", ginv, ginv, second, second)
    tracefree2 = norm2 - 2.0 * mean ** 2
    det_II = second[..., 0, 0] * second[..., 1, 1] - second[..., 0, 1] ** 2
    gauss = det_II / det_g
    return ClassicalData(
        first=first, second=second, normal=normal, mean=mean, gauss=gauss,
        tracefree2=tracefree2, area_density=np.sqrt(det_g),
        ambient_curvature=ambient_curvature,
    )


def euclidean_invariants(f, grid):
    """Classical invariants of f : Sigma -> R^3 (unit normal f_x x f_y /|.|)."""
    f = np.asarray(f, dtype=float)
    fx = np.real(ch.diff_x(f, grid))
    fy = np.real(ch.diff_y(f, grid))
    nu = np.cross(fx, fy)
    nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
    first = _first_form(fx, fy)
    second = np.empty(first.shape)
    fxx = np.real(ch.diff_x(fx, grid))
    fxy = np.real(ch.diff_y(fx, grid))
    fyy = np.real(ch.diff_y(fy, grid))
    second[..., 0, 0] = np.sum(fxx * nu, axis=-1)
    second[..., 0, 1] = np.sum(fxy * nu, axis=-1)
    second[..., 1, 0] = second[..., 0, 1]
    second[..., 1, 1] = np.sum(fyy * nu, axis=-1)
    return _invariants(first, second, 0.0, nu)


def _quadruple_cross(a, b, c):
    """Generalized cross product in R^4: the vector orthogonal to a, b, c
    with components eps_{ijkl} a_j b_k c_l."""
    out = np.empty(a.shape)
    idx = [0, 1, 2, 3]
    for i in range(4):
        rest = [j for j in idx if j != i]
        minor = (a[..., rest[0]] * (b[..., rest[1]] * c[..., rest[2]]
                                    - b[..., rest[2]] * c[..., rest[1]])
                 - a[..., rest[1]] * (b[..., rest[0]] * c[..., rest[2]]
                                      - b[..., rest[2]] * c[..., rest[0]])
                 + a[..., rest[2]] * (b[..., rest[0]] * c[..., rest[1]]
                                      - b[..., rest[1]] * c[..., rest[0]]))
        out[..., i] = minor if i % 2 == 0 else -minor
    return out


def sphere_invariants(p, grid):
    """Classical invariants of p : Sigma -> S^3 subset R^4, with the normal
    tangent to the sphere and orthogonal to the surface."""
    p = np.asarray(p, dtype=float)
    px = np.real(ch.diff_x(p, grid))
    py = np.real(ch.diff_y(p, grid))
    nu = _quadruple_cross(p, px, py)
    nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
    first = _first_form(px, py)
    second = np.empty(first.shape)
    pxx = np.real(ch.diff_x(px, grid))
    pxy = np.real(ch.diff_y(px, grid))
    pyy = np.real(ch.diff_y(py, grid))
    second[..., 0, 0] = np.sum(pxx * nu, axis=-1)
    second[..., 0, 1] = np.sum(pxy * nu, axis=-1)
    second[..., 1, 0] = second[..., 0, 1]
    second[..., 1, 1] = np.sum(pyy * nu, axis=-1)
    return _invariants(first, second, 1.0, nu)


def invariants(points, ambient, grid):
    """Dispatch on the ambient kind returned by the surface catalog."""
    if ambient == "sphere":
        return sphere_invariants(points, grid)
    return euclidean_invariants(points, grid)


def willmore_energy_classical(data, grid):
    """(1/2) integral of |II^0|^2 over the induced area element."""
    return 0.5 * ch.integrate(data.tracefree2 * data.area_density, grid)
