"""Least-squares recovery of constrained-Willmore multipliers."""

import numpy as np
import pytest

import lightcone.chart as ch
import lightcone.connection as cn
import lightcone.multiplier as mp
import lightcone.surface as sf


def small_grid():
    return ch.ChartGrid(0, 2 * np.pi, 0, 2 * np.pi, 24, 24,
                        periodic_x=True, periodic_y=True)


def test_assemble_identity_equation():
    grid = small_grid()
    X, Y = grid.meshgrid()
    target = np.exp(1j * X) + 0.3 * np.cos(Y)
    # single equation u = target, one scalar unknown
    C = np.ones((grid.nx, grid.ny), dtype=complex)
    M = mp.assemble(grid, [[mp.Term(0, C)]], 1)
    b = mp.field_rhs(target, grid)
    u, res = mp.lstsq_solve(M, b)
    (field,) = mp.rhs_to_fields(u, grid, 1)
    assert np.abs(field - target).max() < 1e-8
    assert res < 1e-8


def test_assemble_derivative_equation():
    grid = small_grid()
    X, Y = grid.meshgrid()
    u_true = np.exp(1j * (X + Y))
    rhs = ch.diff_z(u_true, grid) + 2.0 * u_true
    C = np.ones((grid.nx, grid.ny), dtype=complex)
    M = mp.assemble(grid, [[mp.Term(0, C, deriv="z"), mp.Term(0, 2.0 * C)]], 1)
    u, res = mp.lstsq_solve(M, mp.field_rhs(rhs, grid))
    (field,) = mp.rhs_to_fields(u, grid, 1)
    assert np.abs(field - u_true).max() < 1e-6


def test_assemble_conjugate_equation():
    grid = small_grid()
    X, Y = grid.meshgrid()
    u_true = np.exp(1j * X) * (1.0 + 0.5 * np.sin(Y))
    # equation conj(u) + 3 u = rhs is only real-linear
    rhs = np.conj(u_true) + 3.0 * u_true
    C = np.ones((grid.nx, grid.ny), dtype=complex)
    M = mp.assemble(grid, [[mp.Term(0, C, conj=True), mp.Term(0, 3.0 * C)]], 1)
    u, _ = mp.lstsq_solve(M, mp.field_rhs(rhs, grid))
    (field,) = mp.rhs_to_fields(u, grid, 1)
    assert np.abs(field - u_true).max() < 1e-6


def test_field_rhs_roundtrip():
    grid = small_grid()
    rng = np.random.default_rng(0)
    F = rng.standard_normal((grid.nx, grid.ny)) + 1j * rng.standard_normal(
        (grid.nx, grid.ny))
    b = mp.field_rhs(F, grid)
    (back,) = mp.rhs_to_fields(b, grid, 1)
    assert np.allclose(back, F)


def test_smallest_spectrum_of_known_operator():
    grid = small_grid()
    C = np.ones((grid.nx, grid.ny), dtype=complex)
    M = mp.assemble(grid, [[mp.Term(0, 2.0 * C)]], 1)
    svals, smax, _ = mp.smallest_spectrum(M, k=2)
    assert smax == pytest.approx(2.0, rel=1e-6)
    assert svals.min() == pytest.approx(2.0, rel=1e-6)


def test_torus_multiplier_zero(torus, torus_N):
    fit = mp.recover_multiplier(torus, torus_N)
    # exactly Willmore: q = 0 fits with negligible residual
    assert fit.rel_residual < 1e-6
    assert np.abs(fit.q.wz).max() < 1e-6
    # isothermic surfaces carry a nontrivial multiplier kernel; at finite
    # resolution it appears as a singular value far below the next one
    assert fit.kernel_dim(rtol=1e-3) >= 1
    assert fit.kernel_svals[0] < 0.05 * fit.kernel_svals[1]


def test_cylinder_multiplier_fit(cylinder, cylinder_N):
    fit = mp.recover_multiplier(cylinder, cylinder_N)
    assert fit.rel_residual < 5e-2
    # the recovered q certifies the constrained equation pointwise
    C = cn.constrained_residual(cylinder, fit.q, cylinder_N)
    W = cn.willmore_residual(cylinder, cylinder_N)
    m = cylinder.grid.interior_mask(3)
    assert ch.masked_max(C, m) < 0.1 * ch.masked_max(W, m)
    # and is D-closed
    assert ch.masked_max(cn.multiplier_closedness(cylinder, fit.q, cylinder_N),
                         m) < 5e-2


def test_perturbed_surface_has_no_multiplier():
    s = sf.zoo("perturbed", nx=33, ny=33)
    fit = mp.recover_multiplier(s)
    good = mp.recover_multiplier(sf.zoo("cylinder", nx=33, ny=33))
    # the generic perturbation admits no multiplier: residual stays large
    assert fit.rel_residual > 10.0 * good.rel_residual
