"""Acceptance criteria 1-12, one test each.

Tolerances and runtime limits are pinned here rather than read from the
package, so a change in the experiment code cannot loosen them.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from swirlflow.experiments import MEASURES

NUS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
TS = (0.1, 0.5, 1.0)


def run(kind, **params):
    t0 = time.perf_counter()
    rows, checks = MEASURES[kind](**params)
    return rows, {c.name: c.measured for c in checks}, time.perf_counter() - t0


def pick(measured, *words):
    hits = [v for k, v in measured.items() if all(w in k for w in words)]
    assert hits, f"no measurement matching {words}"
    return hits


def report(number, title, results, elapsed, limit):
    """Print one verdict line and fail the test on any unmet condition."""
    results = list(results) + [(f"runtime {elapsed:.1f}s < {limit}s", elapsed < limit)]
    failed = [name for name, ok in results if not ok]
    line = f"{'FAIL' if failed else 'PASS'} {number}: {title}" + (f"  [failed: {'; '.join(failed)}]" if failed else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failed, line


def test_criterion_01_spectrum():
    _, m, dt = run("spectrum", K=128, n_roots=10)
    root = pick(m, "root error")[0]
    gram = pick(m, "Gram")[0]
    report(1, "spectrum", [(f"root error {root:.2e} < 1e-9", root < 1e-9), (f"Gram {gram:.2e} < 1e-8", gram < 1e-8)], dt, 5)


def test_criterion_02_semigroup():
    _, m, dt = run("semigroup", n_profiles=20)
    law, decay = pick(m, "law")[0], pick(m, "single-mode")[0]
    excess = pick(m, "maximum principle")[0]
    report(
        2,
        "semigroup exactness",
        [(f"law {law:.2e} < 1e-12", law < 1e-12), (f"decay {decay:.2e} < 1e-12", decay < 1e-12), ("maximum principle", excess <= 1e-12)],
        dt,
        5,
    )


def test_criterion_03_mass_identity():
    rows, _, dt = run("mass", nus=NUS, ts=TS, rho=0.5, alpha1="step", alpha2="step")
    rho = 0.5
    disk = [r for r in rows if r["geometry"] == "disk"]
    ann = [r for r in rows if r["geometry"].startswith("annulus")]
    assert len(disk) == len(ann) == 15
    disk_def = max(abs(r["mass"] - r["predicted"]) for r in disk)
    # the annulus prediction is taken literally as alpha1 - rho alpha2
    ann_def = max(abs(r["mass"] - (r["alpha1"] - rho * r["alpha2"])) for r in ann)
    report(
        3,
        "mass identity",
        [(f"disk defect {disk_def:.2e} < 1e-6", disk_def < 1e-6), (f"annulus defect vs alpha1 - rho alpha2 {ann_def:.2e} < 1e-6", ann_def < 1e-6)],
        dt,
        30,
    )


def test_criterion_04_flux_identity():
    _, m, dt = run("flux", nu=1e-3, t=1.0, resolution=2048)
    rel = pick(m, "relative residual")
    quiet = pick(m, "times nu")
    report(
        4,
        "flux identity",
        [(f"worst relative residual {max(rel):.2e} < 0.02", max(rel) < 0.02), ("undriven circles carry no flux", max(quiet) < 1e-6)],
        dt,
        30,
    )


def test_criterion_05_rates():
    _, m, dt = run("rates", nus=NUS, ts=(0.1, 1.0), sigmas=(0.0, -1.75), alpha="step")
    l2 = pick(m, "D_0 slope")
    neg = pick(m, "D_-1.75 slope")
    report(
        5,
        "L2 and D_sigma rates",
        [
            (f"L2 slopes {np.round(l2, 4)} in 0.25 +- 0.03", all(abs(s - 0.25) <= 0.03 for s in l2) and len(l2) == 2),
            (f"D_-1.75 slopes {np.round(neg, 4)} in 1.0 +- 0.1", all(abs(s - 1.0) <= 0.1 for s in neg) and len(neg) == 2),
        ],
        dt,
        60,
    )


def test_criterion_06_lq_rates():
    rows, m, dt = run("lq_rates", nus=NUS, q=4.0, sigma=0.2)
    proxy = pick(m, "proxy slope")[0]
    mono = pick(m, "strictly decreasing")[0]
    l4 = pick(m, "L^4 slope")[0]
    report(
        6,
        "L^q proxy rates",
        [(f"H^(0.2,4) slope {proxy:.3f} >= 0", proxy >= 0.0), ("monotone decrease", mono >= 1), (f"L^4 slope {l4:.3f} >= 0.10", l4 >= 0.10)],
        dt,
        120,
    )


def test_criterion_07_vorticity_bounds():
    _, m, dt = run("vorticity_bounds", nus=NUS, ts=TS, n_profiles=20)
    l1 = pick(m, "l1 - ||alpha||_BV")[0]
    rot = pick(m, "1/pi")[0]
    ratio = pick(m, "l1 ratio")[0]
    report(
        7,
        "vorticity bounds",
        [(f"l1 excess {l1:.2e} <= 1e-6", l1 <= 1e-6), (f"rot excess {rot:.2e} <= 1e-8", rot <= 1e-8), (f"factor {ratio:.3f} <= 4", ratio <= 4)],
        dt,
        60,
    )


def test_criterion_08_concentration():
    _, m, dt = run("concentration", nus=NUS, t=1.0, rho=0.5, exponent=0.4)
    atoms = pick(m, "atom error")
    interior = pick(m, "interior L1")
    mass = pick(m, "total mass")
    report(
        8,
        "vorticity concentration",
        [
            (f"{len(atoms)} atom errors, worst {max(atoms):.3g} < 5e-2", len(atoms) == 4 and max(atoms) < 5e-2),
            (f"interior L1 {max(interior):.3g} < 5e-2", max(interior) < 5e-2),
            (f"mass {max(mass):.2e} < 1e-6", max(mass) < 1e-6),
        ],
        dt,
        120,
    )


def test_criterion_09_layer_potentials():
    _, m, dt = run("layer", t_min=1e-4, t_max=1e-2, mode="stepping", nus=NUS)
    cross = pick(m, "sup |Dh - V|")[0]
    tslope = pick(m, "t-slope")[0]
    nslope = pick(m, "nu-slope")[0]
    flat = pick(m, "flatness")[0]
    report(
        9,
        "layer-potential cross-validation",
        [
            (f"BIE vs spectral {cross:.2e} < 1e-3", cross < 1e-3),
            (f"t-slope {tslope:.3f} >= 0.45", tslope >= 0.45),
            (f"nu-slope {nslope:.3f} >= 0.45", nslope >= 0.45),
            (f"flatness {flat:.3g} >= 2", flat >= 2),
        ],
        dt,
        300,
    )


def test_criterion_10_stochastic():
    rows, m, dt = run("stochastic", nus=(1e-2, 1e-3), ts=(0.5, 1.0), n_paths=10_000, seed=0)
    z = pick(m, "z-score")
    same = pick(m, "identical seed")[0]
    report(
        10,
        "stochastic identity",
        [(f"4 z-scores, worst {max(z):.2f} < 3", len(z) == 4 and max(z) < 3), ("seed reproduces", same >= 1)],
        dt,
        120,
    )


def test_criterion_11_pressure():
    _, m, dt = run("pressure")
    closed = pick(m, "closed form")[0]
    res = max(v for k, v in m.items() if "residual" in k and "ratio" not in k)
    ratio = pick(m, "ratio")[0]
    report(
        11,
        "pressure",
        [(f"closed form {closed:.2e} < 1e-8", closed < 1e-8), (f"residual {res:.2e} < 1e-6", res < 1e-6), (f"refinement ratio {ratio:.3g} <= 0.5", ratio <= 0.5)],
        dt,
        10,
    )


def test_criterion_12_uniform_region():
    _, m, dt = run("uniform_region", nus=NUS, t=1.0, exponent=0.4)
    moving = pick(m, "moving-cut")[0]
    stall = pick(m, "fixed-cut")[0]
    report(
        12,
        "uniform region",
        [("moving-cut error strictly decreasing", moving >= 1), (f"fixed cut stalls at {stall:.3g} of |u0(1)|", stall >= 0.25)],
        dt,
        60,
    )
