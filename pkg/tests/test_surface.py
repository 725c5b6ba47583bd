"""Lifts, bundles, the central sphere congruence and the surface catalog."""

import numpy as np
import pytest

import lightcone.minkowski as mk
import lightcone.surface as sf
from lightcone.errors import BranchPoint, HitsInfinity, UnknownSurface


@pytest.mark.parametrize("name", sf.ZOO_NAMES)
def test_zoo_lifts_are_null_and_real(name):
    s = sf.zoo(name, nx=49, ny=49)
    assert s.nullity_defect() < 1e-12
    assert s.reality_defect() < 1e-12
    if name != "perturbed":  # the perturbed cylinder chart is not conformal
        # conformal charts: (sigma_z, sigma_z) = 0 up to the stencil error
        assert s.conformality_defect() < 5e-3


def test_euclidean_lift_components():
    grid = sf.default_grid("cylinder", nx=17, ny=17)
    X, Y = grid.meshgrid()
    f = np.stack([X, Y, X * Y], axis=-1)
    s = sf.euclidean_lift(f, grid)
    f2 = np.sum(f * f, axis=-1)
    assert np.allclose(s.sigma[..., :3].real, f)
    assert np.allclose(s.sigma[..., 3].real, 0.5 * (1 - f2))
    assert np.allclose(s.sigma[..., 4].real, 0.5 * (1 + f2))
    assert s.nullity_defect() < 1e-12


def test_euclidean_graph_roundtrip():
    grid = sf.default_grid("cylinder", nx=17, ny=17)
    X, Y = grid.meshgrid()
    f = np.stack([np.cos(X), np.sin(X), Y], axis=-1)
    s = sf.euclidean_lift(f, grid)
    # the graph is recovered from an arbitrarily rescaled lift
    s2 = sf.rescale_lift(s, 0.3 * X + 0.1)
    assert np.abs(sf.euclidean_graph(s2) - f).max() < 1e-12


def test_spaceform_project_normalization():
    s = sf.zoo("clifford_torus", nx=17, ny=17)
    v = sf.sphere_v_inf(3)
    proj = sf.spaceform_project(s, v)
    assert np.allclose(mk.inner(proj.astype(complex), v.astype(complex), s.g),
                       -1.0)


def test_spaceform_project_hits_infinity():
    grid = sf.default_grid("cylinder", nx=17, ny=17)
    X, Y = grid.meshgrid()
    f = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    s = sf.euclidean_lift(f, grid)
    v = np.zeros(5)
    v[0] = 1.0  # (sigma, e0) = f_0 vanishes on the X = 0 line
    with pytest.raises(HitsInfinity):
        sf.spaceform_project(s, v)


def test_normalized_lift_pairing(torus):
    sn = sf.normalized_lift(torus)
    pairing = mk.inner(sn.sigma_z, sn.sigma_zb, sn.g)
    assert np.abs(pairing - 0.5).max() < 5e-3


def test_normalized_lift_branch_point():
    import lightcone.chart as ch
    grid = ch.ChartGrid(-1.0, 1.0, -1.0, 1.0, 17, 17)
    X, Y = grid.meshgrid()
    # z -> z^2 has a branch point at the origin: |f_z| vanishes there
    f = np.stack([X ** 2 - Y ** 2, 2 * X * Y, np.zeros_like(X)], axis=-1)
    s = sf.euclidean_lift(f, grid)
    with pytest.raises(BranchPoint):
        sf.normalized_lift(s)


def test_central_sphere_signature(torus):
    S = sf.central_sphere(torus)
    pos, neg = sf.congruence_signature(S)
    assert np.all(pos == 3) and np.all(neg == 1)


@pytest.mark.parametrize("name", ["cylinder", "catenoid_patch", "cmc_patch"])
def test_central_sphere_signature_zoo(name):
    s = sf.zoo(name, nx=33, ny=33)
    pos, neg = sf.congruence_signature(sf.central_sphere(s))
    assert np.all(pos == 3) and np.all(neg == 1)


def test_derived_bundles_ranks(torus):
    lam, lam10, lam01, lam1 = sf.derived_bundles(torus)
    assert (lam.rank, lam10.rank, lam01.rank, lam1.rank) == (1, 2, 2, 3)
    # the line and the (1,0)/(0,1) bundles are isotropic
    assert lam.isotropy_defect() < 1e-12
    assert lam10.isotropy_defect() < 5e-3
    assert lam01.isotropy_defect() < 5e-3


def test_intersection_line_of_derived_bundles(torus):
    _, lam10, lam01, _ = sf.derived_bundles(torus)
    line, dims = sf.intersection_line(lam10, lam01)
    assert np.all(dims == 1)
    # the intersection is the original line bundle
    lamf = sf.BundleFrame(torus.sigma[..., None, :], torus.g)
    angles = sf.principal_angles(line, lamf)
    assert angles.max() < 1e-6


def test_intersection_line_synthetic():
    rng = np.random.default_rng(0)
    g = mk.Signature(3).diag
    shared = rng.standard_normal(5).astype(complex)
    a = np.stack([shared, rng.standard_normal(5).astype(complex)])
    b = np.stack([shared, rng.standard_normal(5).astype(complex)])
    fa = sf.BundleFrame(a[None, None], g)
    fb = sf.BundleFrame(b[None, None], g)
    line, dims = sf.intersection_line(fa, fb)
    assert dims[0, 0] == 1
    v = line.vectors[0, 0, 0]
    cos = np.abs(np.vdot(v, shared)) / np.linalg.norm(shared)
    assert cos == pytest.approx(1.0, abs=1e-10)


def test_principal_angles_orthogonal_spans():
    g = mk.Signature(3).diag
    a = np.eye(5)[:2][None, None].astype(complex)
    b = np.eye(5)[2:4][None, None].astype(complex)
    angles = sf.principal_angles(sf.BundleFrame(a, g), sf.BundleFrame(b, g))
    assert np.allclose(angles, np.pi / 2)


def test_zoo_unknown_name():
    with pytest.raises(UnknownSurface):
        sf.zoo("moebius_strip")


def test_zoo_flags():
    assert sf.zoo("clifford_torus", nx=17, ny=17).flags["willmore"]
    assert not sf.zoo("cylinder", nx=17, ny=17).flags["willmore"]
    assert sf.zoo("cylinder", nx=17, ny=17).flags["constrained_willmore"]
    assert not sf.zoo("perturbed", nx=17, ny=17).flags["isothermic"]


def test_zoo_euclidean_points_matches_graph():
    grid = sf.default_grid("catenoid_patch", nx=17, ny=17)
    s = sf.zoo("catenoid_patch", grid=grid)
    pts, ambient = sf.zoo_euclidean_points("catenoid_patch", {}, grid)
    assert ambient == "euclidean"
    assert np.abs(sf.euclidean_graph(s) - pts).max() < 1e-12


def test_rescale_lift_preserves_line(torus):
    X, _ = torus.grid.meshgrid()
    s2 = sf.rescale_lift(torus, 0.1 * np.sin(X))
    lam = (np.sum(s2.sigma * np.conj(torus.sigma), axis=-1)
           / np.sum(np.abs(torus.sigma) ** 2, axis=-1))
    assert np.abs(s2.sigma - lam[..., None] * torus.sigma).max() < 1e-12
