import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swirlflow.basis import (
    DISK,
    Geometry,
    annulus,
    annulus_swirl_basis,
    bessel,
    bessel_zeros,
    dirichlet_swirl_basis,
    eval_mode,
    neumann_scalar_basis,
)

mpmath.mp.dps = 30


def gauss_rule(a, b, panels, m=32):
    x, w = np.polynomial.legendre.leggauss(m)
    e = np.linspace(a, b, panels + 1)
    lo, hi = e[:-1, None], e[1:, None]
    return (lo + (hi - lo) * (x + 1) / 2).ravel(), ((hi - lo) / 2 * w).ravel()


def series_j(n, x, terms=50):
    # plain power series at 30-digit working precision
    x = mpmath.mpf(x)
    return sum((-1) ** m * (x / 2) ** (2 * m + n) / (mpmath.factorial(m) * mpmath.factorial(m + n)) for m in range(terms))


def test_geometry_invariants():
    assert DISK.rmin == 0.0 and not DISK.is_annulus
    g = annulus(0.5)
    assert g.rho == 0.5 and g.area == pytest.approx(np.pi * 0.75)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            annulus(bad)
    with pytest.raises(ValueError):
        Geometry("disk", 0.3)


def test_bessel_values_against_series():
    assert bessel(0, 0.0) == 1.0
    assert bessel(1, 0.0) == 0.0
    for n in (0, 1, 2):
        for x in (0.3, 3.8317059702, 7.5, 11.9):
            assert bessel(n, x) == pytest.approx(float(series_j(n, x)), abs=1e-12)


def test_bessel_large_argument_against_mpmath():
    for n in (0, 1, 2):
        for x in (50.0, 333.3, 999.0):
            ref = float(mpmath.besselj(n, x))
            assert abs(bessel(n, x) - ref) <= 1e-12 * max(1.0, abs(ref)) * 10


def test_bessel_rejects_bad_input():
    with pytest.raises(ValueError):
        bessel(0, np.inf)
    with pytest.raises(ValueError):
        bessel(0, -1.0)
    with pytest.raises(ValueError):
        bessel(3, 1.0)


def test_zeros_match_mpmath():
    for order in (0, 1):
        z = bessel_zeros(order, 60)
        ref = np.array([float(mpmath.besseljzero(order, k)) for k in range(1, 61)])
        assert np.max(np.abs(z - ref)) < 1e-11


def test_first_disk_roots_and_spacing():
    b = dirichlet_swirl_basis(10)
    np.testing.assert_allclose(b.sqrt_lam[:3], [3.8317059702, 7.0155866698, 10.1734681351], atol=1e-9)
    assert abs((b.sqrt_lam[9] - b.sqrt_lam[8]) - np.pi) < 0.01
    assert b.eigenvalues.size == 10 and np.all(np.diff(b.eigenvalues) > 0)


def test_zero_interlacing():
    j0, j1 = bessel_zeros(0, 50), bessel_zeros(1, 50)
    assert np.all(j0 < j1) and np.all(j1[:-1] < j0[1:])


@pytest.mark.parametrize("K", [32, 256])
def test_disk_gram_matrix(K):
    b = dirichlet_swirl_basis(K)
    r, w = gauss_rule(0.0, 1.0, 4 * K // 4 + 8)
    M = b.matrix(r)
    G = M.T @ (M * (w * 2 * np.pi * r)[:, None])
    assert np.max(np.abs(G - np.eye(K))) < 1e-8


def test_disk_norms_match_closed_form():
    # the closed form 1 / (sqrt(pi) |J0(j)|) against mpmath quadrature of J1^2
    b = dirichlet_swirl_basis(4)
    for k in range(4):
        j = mpmath.mpf(b.sqrt_lam[k])
        nsq = 2 * mpmath.pi * mpmath.quad(lambda r: mpmath.besselj(1, j * r) ** 2 * r, [0, 1])
        assert abs(b.norms[k]) == pytest.approx(float(1 / mpmath.sqrt(nsq)), rel=1e-12)


def test_dirichlet_and_neumann_residuals():
    b = dirichlet_swirl_basis(64)
    assert np.max(np.abs(b.matrix([1.0]))) < 1e-10
    n = neumann_scalar_basis(64)
    h = 1e-5
    d = (n.matrix([1.0 + h]) - n.matrix([1.0 - h])) / (2 * h)
    # scale by kappa: the central difference error grows like kappa^3 h^2
    assert np.max(np.abs(d[0, 1:]) / n.sqrt_lam[1:] ** 3) < 1e-8
    assert np.max(np.abs(d)) / n.sqrt_lam[-1] < 1e-6


def test_neumann_constant_mode():
    n = neumann_scalar_basis(5)
    assert n.eigenvalues[0] == 0.0 and n.first_index == 0
    np.testing.assert_allclose(eval_mode(n, 0, [0.0, 0.5, 1.0]), 1 / np.sqrt(np.pi))


def test_curl_of_mode_is_scaled_partner():
    b = dirichlet_swirl_basis(12)
    r = np.linspace(0.05, 0.95, 40)
    h = 1e-6
    v = b.matrix(r)
    dv = (b.matrix(r + h) - b.matrix(r - h)) / (2 * h)
    fd_curl = dv + v / r[:, None]
    partner = b.neumann_partner().matrix(r)[:, 1:]
    np.testing.assert_allclose(fd_curl, partner * b.sqrt_lam, atol=1e-6 * b.sqrt_lam[-1] ** 2)
    np.testing.assert_allclose(b.curl_matrix(r), partner * b.sqrt_lam, atol=1e-12)


def cross(k, r, rho):
    k, r, rho = mpmath.mpf(k), mpmath.mpf(r), mpmath.mpf(rho)
    return mpmath.besselj(1, k * r) * mpmath.bessely(1, k * rho) - mpmath.bessely(1, k * r) * mpmath.besselj(1, k * rho)


def test_annulus_roots_are_roots():
    rho = 0.5
    b = annulus_swirl_basis(rho, 25)
    for k in b.sqrt_lam[:25:6]:
        # refine with mpmath from the returned value; the shift must be tiny
        ref = mpmath.findroot(lambda x: cross(x, 1, rho), k)
        assert abs(float(ref) - k) < 1e-9
        assert abs(float(cross(k, 1, rho))) < 1e-10
    assert abs(b.sqrt_lam[19] / (20 * np.pi / (1 - rho)) - 1) < 0.02


def test_annulus_roots_large_count_terminates():
    b = annulus_swirl_basis(0.5, 4000)
    assert np.all(np.diff(b.sqrt_lam) > 0)
    assert abs(np.diff(b.sqrt_lam)[-1] - 2 * np.pi) < 1e-3


def test_annulus_modes_vanish_and_are_orthonormal():
    rho = 0.3
    b = annulus_swirl_basis(rho, 64)
    assert np.max(np.abs(b.matrix([rho, 1.0]))) < 1e-10
    r, w = gauss_rule(rho, 1.0, 96)
    M = b.matrix(r)
    G = M.T @ (M * (w * 2 * np.pi * r)[:, None])
    assert np.max(np.abs(G - np.eye(64))) < 1e-8
    with pytest.raises(ValueError):
        annulus_swirl_basis(1.0, 4)


def test_eval_mode_errors_and_values():
    b = dirichlet_swirl_basis(4)
    assert abs(eval_mode(b, 2, 1.0)) < 1e-12
    with pytest.raises(IndexError):
        eval_mode(b, 0, 0.5)
    with pytest.raises(IndexError):
        eval_mode(b, 5, 0.5)
    with pytest.raises(ValueError):
        eval_mode(b, 1, 1.2)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=400))
def test_disk_roots_increase_with_pi_spacing(K):
    z = dirichlet_swirl_basis(K).sqrt_lam
    assert z.size == K
    d = np.diff(z)
    assert np.all(d > 3.0) and np.all(d < np.pi + 0.2)
