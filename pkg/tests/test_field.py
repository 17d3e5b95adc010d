import numpy as np
import pytest
from scipy import integrate

from swirlflow.basis import DISK, annulus, annulus_swirl_basis, dirichlet_swirl_basis, neumann_scalar_basis
from swirlflow.field import (
    NormSpec,
    RadialProfile,
    chebyshev_grid,
    gagliardo_seminorm,
    lebesgue_norm,
    profile_from_function,
    read_profile_csv,
    sobolev_norm,
    synthesize,
    to_spectral,
    write_profile_csv,
)


def bump(r):
    return r * (1 - r**2) ** 2


def test_parseval_for_zero_trace_profile():
    f = profile_from_function(bump)
    c = to_spectral(f, dirichlet_swirl_basis(200))
    direct = integrate.quad(lambda r: bump(r) ** 2 * 2 * np.pi * r, 0, 1, epsabs=1e-14)[0]
    assert np.sum(c.coeffs**2) == pytest.approx(direct, rel=1e-9)
    assert sobolev_norm(c, 0.0) ** 2 == pytest.approx(direct, rel=1e-9)


def test_coefficients_against_adaptive_quadrature():
    b = dirichlet_swirl_basis(6)
    f1 = lambda r: r / (2 * np.pi)
    c = to_spectral(f1, b)
    for k in range(6):
        ref = integrate.quad(lambda r: f1(r) * b.matrix([r])[0, k] * 2 * np.pi * r, 0, 1, epsabs=1e-14, limit=200)[0]
        assert c.coeffs[k] == pytest.approx(ref, abs=1e-12)


def test_round_trip_on_annulus():
    g = annulus(0.4)
    # cubic contact keeps A f zero at both walls, so the series converges fast
    f = profile_from_function(lambda r: (r - 0.4) ** 3 * (1 - r) ** 3 * np.sin(5 * r), g)
    c = to_spectral(f, annulus_swirl_basis(0.4, 120))
    back = synthesize(c, f.grid)
    assert np.max(np.abs(back.values - f.values)) < 1e-7 * f.sup()


def test_curl_is_projection_of_exact_vorticity():
    f = profile_from_function(bump)
    c = to_spectral(f, dirichlet_swirl_basis(150))
    w = c.curl()
    exact = lambda r: 2 * (1 - r**2) ** 2 - 4 * r**2 * (1 - r**2)
    ref = to_spectral(exact, neumann_scalar_basis(150))
    assert w.basis.is_neumann and synthesize(w).kind == "scalar"
    assert np.max(np.abs(w.coeffs - ref.coeffs)) < 1e-10


def test_sobolev_norm_one_is_dirichlet_energy():
    # sum lambda c^2 equals the L2 norm of the curl for a zero-trace field
    f = profile_from_function(bump)
    c = to_spectral(f, dirichlet_swirl_basis(200))
    energy = integrate.quad(lambda r: ((1 - r**2) ** 2 * 2 - 4 * r**2 * (1 - r**2)) ** 2 * 2 * np.pi * r, 0, 1)[0]
    assert sobolev_norm(c, 1.0) ** 2 == pytest.approx(energy, rel=1e-6)
    with pytest.raises(ValueError):
        sobolev_norm(c, 2.5)


def test_negative_norm_rejects_neumann_constant():
    n = neumann_scalar_basis(4)
    from swirlflow.field import SpectralField

    with pytest.raises(ValueError):
        sobolev_norm(SpectralField(n, np.array([1.0, 0, 0, 0, 0])), -1.0)
    assert sobolev_norm(SpectralField(n, np.array([0.0, 1.0, 0, 0, 0])), -1.0) == pytest.approx(1 / n.sqrt_lam[1])


def test_lebesgue_norms():
    f = profile_from_function(lambda r: r)
    assert lebesgue_norm(f, 2) == pytest.approx(np.sqrt(np.pi / 2), rel=1e-12)
    assert lebesgue_norm(f, 4) == pytest.approx((2 * np.pi / 6) ** 0.25, rel=1e-12)
    assert lebesgue_norm(f, np.inf) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lebesgue_norm(f, 0.5)


def test_norm_spec_validation():
    NormSpec("gagliardo", 0.5, 2.0)
    for bad in (("gagliardo", 1.0, 2.0), ("gagliardo", 0.5, np.inf), ("lebesgue", 0, 0.5), ("spectral-sobolev", 3.0), ("foo",)):
        with pytest.raises(ValueError):
            NormSpec(*bad)


def test_gagliardo_zero_for_constant_scalar_and_rigid_rotation_is_not():
    c = profile_from_function(lambda r: 3.0 + 0 * r, kind="scalar")
    assert gagliardo_seminorm(c, 0.5, 2.0) < 1e-10
    rot = profile_from_function(lambda r: r)
    assert gagliardo_seminorm(rot, 0.5, 2.0) > 0.1


def test_gagliardo_homogeneity():
    f = profile_from_function(bump)
    a = gagliardo_seminorm(f, 0.3, 2.0)
    assert gagliardo_seminorm(f * 2.5, 0.3, 2.0) == pytest.approx(2.5 * a, rel=1e-12)


def test_gagliardo_against_cartesian_brute_force():
    # Monte Carlo over the 4D product of the disk with itself, seeded
    sigma, q = 0.5, 2.0
    f = profile_from_function(lambda r: r * (1 - r), kind="scalar")
    ours = gagliardo_seminorm(f, sigma, q) ** q
    rng = np.random.default_rng(7)
    n = 2_000_000
    r1, r2 = np.sqrt(rng.random(n)), np.sqrt(rng.random(n))
    t1, t2 = 2 * np.pi * rng.random(n), 2 * np.pi * rng.random(n)
    d2 = r1**2 + r2**2 - 2 * r1 * r2 * np.cos(t1 - t2)
    g = lambda r: r * (1 - r)
    vals = np.abs(g(r1) - g(r2)) ** q / d2 ** ((2 + sigma * q) / 2)
    mc = np.pi**2 * vals.mean()
    assert ours == pytest.approx(mc, rel=0.05)


def test_csv_round_trip(tmp_path):
    f = profile_from_function(bump, grid=chebyshev_grid(65))
    p = tmp_path / "p.csv"
    write_profile_csv(p, f)
    g = read_profile_csv(p)
    np.testing.assert_array_equal(g.values, f.values)
    np.testing.assert_array_equal(g.r, f.r)


def test_profile_validation():
    grid = chebyshev_grid(9)
    with pytest.raises(ValueError):
        RadialProfile(DISK, grid, np.zeros(5))
    with pytest.raises(ValueError):
        RadialProfile(annulus(0.5), grid, np.zeros(9))
    a = profile_from_function(bump, grid=grid)
    b = profile_from_function(bump, grid=chebyshev_grid(11))
    with pytest.raises(ValueError):
        a + b


def test_grid_calculus():
    g = chebyshev_grid(64, 0.2, 1.0)
    f = np.exp(g.r)
    assert g.integrate(f) == pytest.approx(np.e - np.exp(0.2), rel=1e-13)
    assert np.max(np.abs(g.derivative(f) - f)) < 1e-10
    assert g.integral_to(f, 0.6) == pytest.approx(np.exp(0.6) - np.exp(0.2), rel=1e-12)
    assert np.max(np.abs(g.interp(f, [0.33, 0.71]) - np.exp([0.33, 0.71]))) < 1e-13
