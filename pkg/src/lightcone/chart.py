"""Discrete calculus on a rectangular grid of a holomorphic chart z = x + iy.

Fields are numpy arrays with leading shape (nx, ny); values may carry any
trailing shape (scalars, vectors, matrices).  Derivatives are second-order
central stencils in the interior, second-order one-sided stencils on
non-periodic boundaries, and wrapped stencils on periodic axes.

Conventions fixed here and used everywhere else:

* Hodge star on 1-forms: *w = -w o J, i.e. (*w)_z = -i w_z, (*w)_zbar = +i w_zbar.
* 2-forms are stored as their dz^dzbar coefficient; dz^dzbar = -2i dx^dy.
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class ChartGrid:
    """Rectangular grid of the chart domain.

    On a periodic axis the right endpoint is excluded (points x_min + i*h
    with h = L/n); on a non-periodic axis both endpoints are included
    (h = L/(n-1)).
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    periodic_x: bool = False
    periodic_y: bool = False

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise ValueError("grids need nx, ny >= 5 for the stencils used here")

    @property
    def hx(self):
        L = self.x_max - self.x_min
        return L / self.nx if self.periodic_x else L / (self.nx - 1)

    @property
    def hy(self):
        L = self.y_max - self.y_min
        return L / self.ny if self.periodic_y else L / (self.ny - 1)

    @property
    def h(self):
        return max(self.hx, self.hy)

    @property
    def x(self):
        return self.x_min + self.hx * np.arange(self.nx)

    @property
    def y(self):
        return self.y_min + self.hy * np.arange(self.ny)

    def meshgrid(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def z(self):
        X, Y = self.meshgrid()
        return X + 1j * Y

    @property
    def npts(self):
        return self.nx * self.ny

    def refined(self):
        """Same domain with roughly halved spacing (doubled point count)."""
        nx = 2 * self.nx if self.periodic_x else 2 * self.nx - 1
        ny = 2 * self.ny if self.periodic_y else 2 * self.ny - 1
        return ChartGrid(self.x_min, self.x_max, self.y_min, self.y_max,
                         nx, ny, self.periodic_x, self.periodic_y)

    def open_copy(self):
        """Non-periodic grid over the same sample points.

        Data produced by integrating on the universal cover (trivializations
        and everything derived from them) generally fails to match across a
        periodic seam; differentiating it needs one-sided stencils there.
        """
        if not (self.periodic_x or self.periodic_y):
            return self
        return ChartGrid(self.x_min, self.x_min + self.hx * (self.nx - 1),
                         self.y_min, self.y_min + self.hy * (self.ny - 1),
                         self.nx, self.ny, False, False)

    def with_shape(self, nx, ny):
        return ChartGrid(self.x_min, self.x_max, self.y_min, self.y_max,
                         nx, ny, self.periodic_x, self.periodic_y)

    def interior_mask(self, margin=2):
        """Mask excluding `margin` cells next to each non-periodic boundary.

        Residual norms are reported over this mask so one-sided boundary
        stencils do not pollute convergence measurements.
        """
        mask = np.ones((self.nx, self.ny), dtype=bool)
        if not self.periodic_x:
            mask[:margin, :] = False
            mask[-margin:, :] = False
        if not self.periodic_y:
            mask[:, :margin] = False
            mask[:, -margin:] = False
        return mask


def _diff_axis(f, h, axis, periodic):
    f = np.asarray(f)
    if periodic:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)
    out = (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)

    def sl(i):
        idx = [slice(None)] * f.ndim
        idx[axis] = i
        return tuple(idx)

    # one-sided second-order stencils at the two boundaries
    out[sl(0)] = (-3.0 * f[sl(0)] + 4.0 * f[sl(1)] - f[sl(2)]) / (2.0 * h)
    out[sl(-1)] = (3.0 * f[sl(-1)] - 4.0 * f[sl(-2)] + f[sl(-3)]) / (2.0 * h)
    return out


def diff_x(f, grid):
    return _diff_axis(f, grid.hx, 0, grid.periodic_x)


def diff_y(f, grid):
    return _diff_axis(f, grid.hy, 1, grid.periodic_y)


def diff_z(f, grid):
    """Discrete d/dz = (d/dx - i d/dy) / 2."""
    return 0.5 * (diff_x(f, grid) - 1j * diff_y(f, grid))


def diff_zbar(f, grid):
    """Discrete d/dzbar = (d/dx + i d/dy) / 2."""
    return 0.5 * (diff_x(f, grid) + 1j * diff_y(f, grid))


def _diff_matrix_1d(n, h, periodic):
    """Sparse 1-D derivative matrix matching _diff_axis."""
    D = sp.lil_matrix((n, n))
    for i in range(n):
        D[i, (i + 1) % n] += 1.0 / (2 * h)
        D[i, (i - 1) % n] -= 1.0 / (2 * h)
    if not periodic:
        D[0, :] = 0.0
        D[0, 0], D[0, 1], D[0, 2] = -3.0 / (2 * h), 4.0 / (2 * h), -1.0 / (2 * h)
        D[n - 1, :] = 0.0
        D[n - 1, n - 1], D[n - 1, n - 2], D[n - 1, n - 3] = (
            3.0 / (2 * h), -4.0 / (2 * h), 1.0 / (2 * h))
    return D.tocsr()


def diff_matrices(grid):
    """Sparse (npts x npts) matrices for d/dz and d/dzbar on flattened fields.

    Flattening is row-major over (i, j): p = i * ny + j.
    """
    Dx1 = _diff_matrix_1d(grid.nx, grid.hx, grid.periodic_x)
    Dy1 = _diff_matrix_1d(grid.ny, grid.hy, grid.periodic_y)
    Dx = sp.kron(Dx1, sp.identity(grid.ny), format="csr")
    Dy = sp.kron(sp.identity(grid.nx), Dy1, format="csr")
    Dz = 0.5 * (Dx - 1j * Dy)
    Dzb = 0.5 * (Dx + 1j * Dy)
    return Dz.tocsr(), Dzb.tocsr()


@dataclass(frozen=True)
class OneForm:
    """1-form w = wz dz + wzb dzbar with values of any trailing shape.

    Also used for connection coefficients stored relative to the trivial
    flat connection d.
    """

    wz: np.ndarray
    wzb: np.ndarray

    def star(self):
        """Hodge star with the convention *w = -w o J."""
        return OneForm(-1j * self.wz, 1j * self.wzb)

    def conj(self):
        """Complex conjugate form: (conj w)_z = conj(w_zbar)."""
        return OneForm(np.conj(self.wzb), np.conj(self.wz))

    def reality_defect(self):
        """Max-norm of wzb - conj(wz); zero for a real form."""
        return np.max(np.abs(self.wzb - np.conj(self.wz)))

    def __add__(self, other):
        return OneForm(self.wz + other.wz, self.wzb + other.wzb)

    def __sub__(self, other):
        return OneForm(self.wz - other.wz, self.wzb - other.wzb)

    def __mul__(self, c):
        return OneForm(c * self.wz, c * self.wzb)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


def zero_form(grid, value_shape, m=None):
    shape = (grid.nx, grid.ny) + tuple(value_shape)
    return OneForm(np.zeros(shape, dtype=complex), np.zeros(shape, dtype=complex))


def exterior_d(w, grid, connection=None):
    """dz^dzbar coefficient of the covariant exterior derivative d^D w.

    `connection` holds coefficients (A_z, A_zbar) relative to flat d and acts
    on endomorphism-valued forms by commutator.  With connection=None this is
    the plain exterior derivative.
    """
    out = diff_z(w.wzb, grid) - diff_zbar(w.wz, grid)
    if connection is not None:
        out = out + _comm(connection.wz, w.wzb) - _comm(connection.wzb, w.wz)
    return out


def _comm(a, b):
    return a @ b - b @ a


def wedge_bracket(a, b):
    """dz^dzbar coefficient of the 2-form [a ^ b] for endomorphism-valued
    1-forms: [a_z, b_zbar] - [a_zbar, b_z]."""
    return _comm(a.wz, b.wzb) - _comm(a.wzb, b.wz)


def quadrature_weights(grid):
    wx = np.full(grid.nx, grid.hx)
    if not grid.periodic_x:
        wx[0] *= 0.5
        wx[-1] *= 0.5
    wy = np.full(grid.ny, grid.hy)
    if not grid.periodic_y:
        wy[0] *= 0.5
        wy[-1] *= 0.5
    return wx[:, None] * wy[None, :]


def integrate(density, grid):
    """Quadrature of a scalar density against dx^dy: trapezoidal on
    non-periodic axes, rectangle rule on periodic ones."""
    return np.sum(density * quadrature_weights(grid))


def masked_max(field, mask):
    """Max of pointwise Frobenius norms over a boolean grid mask."""
    f = np.asarray(field)
    flat = f.reshape(f.shape[0], f.shape[1], -1)
    norms = np.linalg.norm(flat, axis=-1)
    return float(np.max(norms[mask])) if np.any(mask) else 0.0


def masked_l2(field, grid, mask):
    """Quadrature-weighted L2 norm of pointwise Frobenius norms over a mask."""
    f = np.asarray(field)
    flat = f.reshape(f.shape[0], f.shape[1], -1)
    norms2 = np.sum(np.abs(flat) ** 2, axis=-1)
    w = quadrature_weights(grid) * mask
    return float(np.sqrt(np.sum(norms2 * w)))


def fit_slope(hs, errs):
    """Least-squares slope of log(err) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    good = errs > 0
    if np.sum(good) < 2:
        return float("nan")
    return float(np.polyfit(np.log(hs[good]), np.log(errs[good]), 1)[0])


def export_field_csv(path, field, grid, header_components=None):
    """Write a field as CSV rows (i, j, x, y, components...)."""
    f = np.asarray(field)
    flat = f.reshape(grid.nx, grid.ny, -1)
    ncomp = flat.shape[-1]
    names = header_components or [f"c{k}" for k in range(ncomp)]
    X, Y = grid.meshgrid()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "x", "y"] + list(names))
        for i in range(grid.nx):
            for j in range(grid.ny):
                vals = []
                for v in flat[i, j]:
                    if np.iscomplexobj(flat) and abs(np.imag(v)) > 0:
                        vals.append(repr(complex(v)))
                    else:
                        vals.append(repr(float(np.real(v))))
                writer.writerow([i, j, repr(float(X[i, j])), repr(float(Y[i, j]))] + vals)
