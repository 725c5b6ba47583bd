"""Classical curvature computations cross-checked against closed forms."""

import numpy as np
import pytest

import lightcone.chart as ch
import lightcone.oracle as orc
import lightcone.surface as sf


def test_round_sphere_patch_invariants():
    grid = sf.default_grid("round_sphere_patch", nx=65, ny=65)
    pts, ambient = sf.zoo_euclidean_points("round_sphere_patch", {}, grid)
    assert ambient == "euclidean"
    data = orc.euclidean_invariants(pts, grid)
    m = grid.interior_mask(3)
    # unit sphere: |H| = 1, K = 1, totally umbilic
    assert np.abs(np.abs(data.mean) - 1.0)[m].max() < 1e-3
    assert np.abs(data.gauss - 1.0)[m].max() < 1e-3
    assert np.abs(data.tracefree2)[m].max() < 1e-3


def test_cylinder_invariants():
    grid = sf.default_grid("cylinder", nx=65, ny=65)
    pts, _ = sf.zoo_euclidean_points("cylinder", {}, grid)
    data = orc.euclidean_invariants(pts, grid)
    m = grid.interior_mask(3)
    # unit cylinder: principal curvatures {0, -1} for inward-going normal
    assert np.abs(np.abs(data.mean) - 0.5)[m].max() < 1e-3
    assert np.abs(data.gauss)[m].max() < 1e-3
    assert np.abs(data.tracefree2 - 0.5)[m].max() < 1e-3
    assert data.conformality_defect() < 5e-3  # stencil error, O(h^2)


def test_catenoid_is_minimal():
    grid = sf.default_grid("catenoid_patch", nx=97, ny=97)
    pts, _ = sf.zoo_euclidean_points("catenoid_patch", {}, grid)
    data = orc.euclidean_invariants(pts, grid)
    m = grid.interior_mask(3)
    assert np.abs(data.mean)[m].max() < 1e-3
    # Gauss curvature of the catenoid: K = -cosh(y)^{-4}
    _, Y = grid.meshgrid()
    assert np.abs(data.gauss + np.cosh(Y) ** -4)[m].max() < 1e-3


def test_clifford_torus_invariants():
    grid = sf.default_grid("clifford_torus", nx=65, ny=65)
    pts, ambient = sf.zoo_euclidean_points("clifford_torus", {}, grid)
    assert ambient == "sphere"
    data = orc.sphere_invariants(pts, grid)
    # minimal in S^3, flat, |II^0|^2 = 2
    assert np.abs(data.mean).max() < 1e-10
    assert np.abs(data.intrinsic_gauss).max() < 1e-10
    assert np.abs(data.tracefree2 - 2.0).max() < 1e-10
    assert data.conformality_defect() < 1e-12


def test_cmc_patch_invariants():
    grid = sf.default_grid("cmc_patch", nx=65, ny=65)
    pts, ambient = sf.zoo_euclidean_points("cmc_patch", {}, grid)
    assert ambient == "sphere"
    data = orc.sphere_invariants(pts, grid)
    # a product torus with radii r, s has H = (s^2 - r^2) / (2 r s) in S^3
    r2, s2 = 0.4, 0.6
    H = (s2 - r2) / (2.0 * np.sqrt(r2 * s2))
    assert np.abs(np.abs(data.mean) - abs(H)).max() < 1e-10
    assert np.abs(data.intrinsic_gauss).max() < 1e-10


def test_clifford_torus_energy_closed_form():
    # the energy converges at second order to 2 pi^2
    errs, hs = [], []
    for n in (33, 65, 129):
        grid = sf.default_grid("clifford_torus", nx=n, ny=n)
        pts, _ = sf.zoo_euclidean_points("clifford_torus", {}, grid)
        data = orc.sphere_invariants(pts, grid)
        energy = orc.willmore_energy_classical(data, grid)
        errs.append(abs(energy - 2.0 * np.pi ** 2))
        hs.append(grid.hx)
    assert errs[-1] < 2e-2
    assert ch.fit_slope(hs, errs) == pytest.approx(2.0, abs=0.2)


def test_quadruple_cross_orthogonality():
    rng = np.random.default_rng(0)
    a, b, c = rng.standard_normal((3, 4))
    out = orc._quadruple_cross(a[None], b[None], c[None])[0]
    for v in (a, b, c):
        assert abs(np.dot(out, v)) < 1e-12
    # matches the determinant expansion convention
    assert np.linalg.det(np.stack([out, a, b, c])) > 0


def test_invariants_dispatch():
    grid = sf.default_grid("cylinder", nx=17, ny=17)
    pts, ambient = sf.zoo_euclidean_points("cylinder", {}, grid)
    d1 = orc.invariants(pts, ambient, grid)
    d2 = orc.euclidean_invariants(pts, grid)
    assert np.allclose(d1.mean, d2.mean)
