import numpy as np
import pytest
from scipy import integrate, special

from swirlflow.basis import bessel_zeros, dirichlet_swirl_basis, neumann_scalar_basis
from swirlflow.field import SpectralField, profile_from_function, sobolev_norm, to_spectral
from swirlflow.semigroup import EmbeddingTooSmall, EvolutionParams, evolve, fractional_apply, whole_plane_evolve


def test_params_validation():
    assert EvolutionParams(0.1, 2.0).nut == pytest.approx(0.2)
    for bad in ((-1.0, 1.0), (1.0, np.nan), (1.0, -0.1)):
        with pytest.raises(ValueError):
            EvolutionParams(*bad)


def test_identity_at_zero_time():
    b = dirichlet_swirl_basis(8)
    f = SpectralField(b, np.arange(1.0, 9.0))
    np.testing.assert_array_equal(evolve(f, EvolutionParams(1e-3, 0.0)).coeffs, f.coeffs)


def test_single_mode_decay():
    b = dirichlet_swirl_basis(3)
    j11 = bessel_zeros(1, 1)[0]
    out = evolve(SpectralField(b, np.array([1.0, 0, 0])), EvolutionParams(0.01, 1.0))
    assert out.coeffs[0] == pytest.approx(np.exp(-0.01 * j11**2), rel=1e-14)


def test_neumann_constant_is_stationary():
    n = neumann_scalar_basis(6)
    w0 = SpectralField(n, np.concatenate([[np.sqrt(np.pi) / np.pi], np.zeros(6)]))
    for nut in (0.0, 0.1, 10.0):
        out = evolve(w0, EvolutionParams(nut, 1.0))
        np.testing.assert_allclose(out(np.array([0.0, 0.5, 1.0])), 1 / np.pi, rtol=1e-14)


def test_semigroup_law():
    b = dirichlet_swirl_basis(40)
    f = SpectralField(b, 1.0 / np.arange(1, 41))
    a = evolve(evolve(f, EvolutionParams(1.0, 0.003)), EvolutionParams(1.0, 0.004))
    c = evolve(f, EvolutionParams(1.0, 0.007))
    np.testing.assert_allclose(a.coeffs, c.coeffs, rtol=1e-13)


def test_fractional_weights_are_bounded():
    # sup_x x^g e^{-x} = (g/e)^g
    b = dirichlet_swirl_basis(500)
    f = SpectralField(b, np.ones(500))
    for g in (0.25, 1.0, 1.5):
        w = fractional_apply(f, g, EvolutionParams(1e-3, 1.0)).coeffs
        assert np.max(w) <= (g / np.e) ** g * (1 + 1e-12)
    with pytest.raises(ValueError):
        fractional_apply(f, 2.5, EvolutionParams(1.0, 1.0))
    with pytest.raises(ValueError):
        fractional_apply(f, 0.5, EvolutionParams(1.0, 0.0))


def test_strong_continuity():
    f = to_spectral(lambda r: r * (1 - r**2) ** 2, dirichlet_swirl_basis(200))
    for sigma in (0.0, 0.25, 0.45):
        errs = [sobolev_norm(evolve(f, EvolutionParams(nut, 1.0)) - f, sigma) for nut in (1e-2, 1e-3, 1e-4, 1e-5)]
        assert np.all(np.diff(errs) < 0) and errs[-1] < 1e-2 * errs[0]


def heat_oracle(w, nut, r):
    # order-1 radial heat kernel acting on a compactly supported swirl speed
    def k(rr, rp):
        z = rr * rp / (2 * nut)
        return np.exp(-((rr - rp) ** 2) / (4 * nut)) * special.ive(1, z) * rp / (2 * nut)

    return np.array([integrate.quad(lambda rp: k(rr, rp) * w(rp), 0, 1, epsabs=1e-13, limit=200)[0] for rr in r])


def test_whole_plane_against_kernel_oracle():
    u0 = profile_from_function(lambda r: r * (1 - r) + 0.3 * r)
    nut = 0.01
    out = whole_plane_evolve(u0, EvolutionParams(nut, 1.0))
    r = np.array([0.1, 0.5, 0.9, 1.0])
    ref = 0.3 * r + heat_oracle(lambda x: x * (1 - x), nut, r)
    np.testing.assert_allclose(out(r), ref, atol=1e-9)


def test_whole_plane_radius_independence_and_errors():
    u0 = profile_from_function(lambda r: np.sin(3 * r))
    p = EvolutionParams(0.005, 1.0)
    a, b = whole_plane_evolve(u0, p, R=4.0), whole_plane_evolve(u0, p, R=8.0)
    assert np.max(np.abs(a.values - b.values)) < 1e-8
    assert whole_plane_evolve(u0, EvolutionParams(0.0, 1.0)) is u0
    with pytest.raises(EmbeddingTooSmall):
        whole_plane_evolve(u0, EvolutionParams(1.0, 1.0))
    with pytest.raises(ValueError):
        whole_plane_evolve(u0, p, R=2.0)


def test_maximum_principle_and_contraction_on_random_profiles():
    rng = np.random.default_rng(11)
    b = dirichlet_swirl_basis(64)
    r = np.linspace(0.0, 1.0, 4001)
    for _ in range(20):
        f = SpectralField(b, rng.normal(size=64) / np.arange(1, 65) ** 2)
        out = evolve(f, EvolutionParams(10 ** rng.uniform(-4, -1), rng.uniform(0.05, 2.0)))
        assert np.max(np.abs(out(r))) <= np.max(np.abs(f(r))) + 1e-8
        assert sobolev_norm(out, 0.0) <= sobolev_norm(f, 0.0)
