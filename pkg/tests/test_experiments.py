import csv
import json

import numpy as np
import pytest

from swirlflow.basis import DISK, annulus, dirichlet_swirl_basis
from swirlflow.driving import step, zero
from swirlflow.experiments import (
    Check,
    _check,
    interior_convergence,
    load_config,
    rate_fit,
    run_experiment,
    run_plan,
    truncation_change,
    uniform_region,
    validate_config,
)
from swirlflow.field import profile_from_function


def test_rate_fit_examples():
    nus = np.geomspace(1e-6, 1e-2, 5)
    slope, _, r2 = rate_fit(list(zip(nus, nus**0.25)))
    assert abs(slope - 0.25) < 1e-12 and r2 == pytest.approx(1.0)
    slope, _, r2 = rate_fit(list(zip(nus, np.full(5, 3.0))))
    assert abs(slope) < 1e-12 and r2 == 1.0
    slope, _, _ = rate_fit(list(zip(nus, nus**0.5 * (1 + 0.01 * np.sin(np.log(nus))))))
    assert abs(slope - 0.5) < 0.02


def test_rate_fit_rejects_bad_data():
    with pytest.raises(ValueError):
        rate_fit([(1e-3, 1.0), (1e-4, 2.0)])
    with pytest.raises(ValueError):
        rate_fit([(1e-3, 1.0), (1e-4, 0.0), (1e-5, 2.0)])
    with pytest.raises(ValueError):
        rate_fit([(1e-3, 1.0), (-1e-4, 1.0), (1e-5, 2.0)])


def test_check_lines():
    c = _check("demo", 0.1, "<", 0.2)
    assert isinstance(c, Check) and c.passed
    assert c.line().startswith("PASS")
    assert not _check("demo", 0.3, "<", 0.2).passed
    assert _check("band", 0.26, "in", (0.22, 0.28)).passed
    assert not _check("band", 0.3, "in", (0.22, 0.28)).passed
    assert not _check("nan", float("nan"), "<", 1.0).passed


def test_interior_convergence_step_is_flat_inside():
    rows = interior_convergence(None, step(), 1.0, (0.0, 0.5), nus=[1e-5], m=0)
    assert rows[0]["error"] < 1e-6


def test_interior_convergence_decreases_for_every_order():
    u0 = profile_from_function(lambda r: r * (1 - r**2) ** 2)
    for m in (0, 1, 2):
        errs = [row["error"] for row in interior_convergence(u0, step(), 1.0, (0.1, 0.6), [1e-2, 1e-3, 1e-4], m=m)]
        assert np.all(np.diff(errs) < 0)


def test_interior_convergence_diagonal_case():
    # u0 a finite mode combination, alpha = 0: error is the decayed-mode sum
    b = dirichlet_swirl_basis(3)
    c = np.array([1.0, -0.5, 0.25])
    u0 = profile_from_function(lambda r: b.matrix(r) @ c)
    nu, t = 1e-2, 1.0
    r = np.linspace(0.1, 0.6, 201)
    expect = np.max(np.abs(b.matrix(r) @ (c * np.expm1(-nu * t * b.eigenvalues))))
    got = interior_convergence(u0, zero(), t, (0.1, 0.6), [nu], m=0)[0]["error"]
    assert got == pytest.approx(expect, abs=1e-10)


def test_interior_convergence_band_errors():
    for band in ((0.2, 1.0), (0.5, 0.4)):
        with pytest.raises(ValueError):
            interior_convergence(None, step(), 1.0, band, [1e-3])
    with pytest.raises(ValueError):
        interior_convergence(None, step(), 1.0, (0.1, 0.999), [1e-3], m=2, n_points=11)
    with pytest.raises(ValueError):
        interior_convergence(None, step(), 1.0, (0.5, 0.9), [1e-3], geometry=annulus(0.5))
    with pytest.raises(ValueError):
        interior_convergence(None, step(), 1.0, (0.1, 0.5), [1e-3], m=3)


def test_uniform_region():
    u0 = profile_from_function(lambda r: r / (2 * np.pi) + 0.2 * r * (1 - r**2) * np.cos(3 * r))
    errs = [row["error"] for row in uniform_region(u0, 1.0, [1e-2, 1e-3, 1e-4, 1e-5])]
    assert np.all(np.diff(errs) < 0)
    stall = [row["error"] for row in uniform_region(u0, 1.0, [1e-5, 1e-6], cut=0.999)]
    assert min(stall) >= 0.25 * abs(u0(1.0))
    for bad in (0.5, 0.7, 0.0):
        with pytest.raises(ValueError):
            uniform_region(u0, 1.0, [1e-3], exponent=bad)


def test_uniform_region_whole_domain_for_vanishing_trace():
    u0 = profile_from_function(lambda r: r * (1 - r) * np.exp(r))
    errs = [row["error"] for row in uniform_region(u0, 1.0, [1e-2, 1e-3, 1e-4], whole=True)]
    assert np.all(np.diff(errs) < 0)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        validate_config({})
    with pytest.raises(ValueError):
        validate_config({"experiments": {"a": {"kind": "nope"}}})
    with pytest.raises(ValueError):
        validate_config({"experiments": {"a": 3}})
    p = tmp_path / "plan.toml"
    p.write_text('seed = 4\n[experiments.spec]\nkind = "spectrum"\nK = 32\n')
    assert load_config(p)["experiments"]["spec"]["K"] == 32


def test_run_plan_writes_artifacts_deterministically(tmp_path):
    cfg = {
        "seed": 1,
        "experiments": {
            "spec": {"kind": "spectrum", "K": 32},
            "sg": {"kind": "semigroup", "n_profiles": 3, "K": 16},
            "p": {"kind": "pressure"},
        },
    }
    a = run_plan(cfg, tmp_path / "a", workers=2)
    b = run_plan(cfg, tmp_path / "b", workers=1)
    assert [r.name for r in a] == ["spec", "sg", "p"]
    for name in ("spec", "sg", "p"):
        assert (tmp_path / "a" / f"{name}.csv").read_bytes() == (tmp_path / "b" / f"{name}.csv").read_bytes()
    summary = (tmp_path / "a" / "summary.txt").read_text().splitlines()
    assert summary and all(line.split()[0] in ("PASS", "FAIL") for line in summary)
    assert json.loads((tmp_path / "a" / "config.json").read_text())["seed"] == 1
    with open(tmp_path / "a" / "spec.csv") as fh:
        assert len(list(csv.reader(fh))) > 1
    assert all(c.passed for r in a for c in r.checks)


def test_run_experiment_rejects_unknown_kind():
    with pytest.raises(ValueError):
        run_experiment("x", "nope", {})


def test_truncation_change_under_k_doubling():
    from swirlflow.duhamel import annulus_data, disk_data

    u0 = profile_from_function(lambda r: r * (1 - r) * np.exp(r))
    for nu, t in ((1e-2, 0.1), (1e-6, 1.0)):
        K, change = truncation_change(u0, disk_data(step()), nu, t)
        assert K >= 512 and change < 1e-8
    _, change = truncation_change(None, annulus_data(step(), step(), 0.5), 1e-5, 1.0)
    assert change < 1e-8
    # an under-resolved solve is caught
    assert truncation_change(u0, disk_data(step()), 1e-4, 0.1, K=20)[1] > 1e-3
