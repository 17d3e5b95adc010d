import numpy as np
import pytest

from swirlflow.basis import annulus
from swirlflow.driving import ramp
from swirlflow.duhamel import disk_data, f1_profile, solve_flow
from swirlflow.field import chebyshev_grid, profile_from_function
from swirlflow.pressure import gradient_identity_residual, pressure_from_velocity, write_pressure_csv


def test_pressure_of_rigid_rotation():
    u = f1_profile()
    r = u.r
    raw = pressure_from_velocity(u, normalize=False)
    np.testing.assert_allclose(raw.values, (r**2 - 1) / (8 * np.pi**2), atol=1e-15)
    p = pressure_from_velocity(u)
    np.testing.assert_allclose(p.values, (2 * r**2 - 1) / (16 * np.pi**2), atol=1e-15)
    assert abs(p.mean()) < 1e-16
    assert gradient_identity_residual(u, p) < 1e-8


def test_zero_and_scaling():
    z = profile_from_function(lambda r: 0 * r)
    p = pressure_from_velocity(z)
    assert np.all(p.values == 0) and gradient_identity_residual(z, p) == 0.0
    u = profile_from_function(lambda r: np.sin(3 * r) * r)
    np.testing.assert_allclose(pressure_from_velocity(u * 2).values, 4 * pressure_from_velocity(u).values, rtol=1e-13)


def test_annulus_pressure_against_closed_form():
    g = annulus(0.5)
    u = profile_from_function(lambda r: 1 / r, g)  # p' = 1/r^3
    raw = pressure_from_velocity(u, normalize=False)
    np.testing.assert_allclose(raw.values, (1 - 1 / u.r**2) / 2, atol=1e-12)


def test_residual_shrinks_under_refinement():
    # a driven flow's pressure: refining the grid cannot increase the residual
    sol = solve_flow(None, disk_data(ramp(1.0)), 1e-3, 0.5)
    res = []
    for n in (33, 65, 129):
        u = sol.profile(chebyshev_grid(n))
        res.append(gradient_identity_residual(u, pressure_from_velocity(u)))
    assert res[-1] < 1e-6
    assert res[1] <= 0.5 * res[0] and res[2] <= 0.5 * res[1]


def test_validation_and_csv(tmp_path):
    u = f1_profile()
    with pytest.raises(ValueError):
        pressure_from_velocity(u.with_values(u.values, kind="scalar"))
    with pytest.raises(ValueError):
        gradient_identity_residual(f1_profile(grid=chebyshev_grid(9)), pressure_from_velocity(u))
    write_pressure_csv(tmp_path / "p.csv", pressure_from_velocity(u))
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape == (u.r.size, 2)
