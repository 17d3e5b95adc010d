"""Vorticity of swirl flows: mass and flux identities, L1 bounds, and concentration."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import Geometry
from .duhamel import SwirlBoundaryData, SwirlSolution, f1_profile, solve_flow
from .field import RadialGrid, RadialProfile, SpectralField, default_grid

__all__ = [
    "DiskMeasure",
    "ShellMasses",
    "ConcentrationReport",
    "curl",
    "total_mass",
    "boundary_flux",
    "l1_mass",
    "shell_mass",
    "boundary_decompose",
    "concentration_limit",
    "write_concentration_csv",
    "default_cut",
]

TWO_PI = 2.0 * np.pi


def curl(u):
    """Scalar vorticity ``v' + v / r`` of a swirl field.

    A :class:`SpectralField` is mapped mode by mode onto the Neumann partner
    basis (order-one modes go to ``kappa_k`` times their order-zero partner); a
    :class:`SwirlSolution` is differentiated analytically; a
    :class:`RadialProfile` is differentiated on its grid (Chebyshev
    differentiation on Chebyshev grids, second-order differences otherwise).
    At ``r = 0`` the limit ``2 v'(0)`` is used.
    """
    if isinstance(u, SpectralField):
        return u.curl()
    if isinstance(u, SwirlSolution):
        return u.vorticity_profile()
    if not isinstance(u, RadialProfile):
        raise TypeError("curl needs a RadialProfile, SpectralField or SwirlSolution")
    if u.kind != "velocity":
        raise ValueError("curl is taken of velocity profiles")
    r, v = u.r, u.values
    dv = u.grid.derivative(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        om = dv + np.where(r > 0, v / np.where(r > 0, r, 1.0), dv)
    return u.with_values(om, kind="scalar")


def total_mass(omega: RadialProfile) -> float:
    """Signed mass ``2 pi int w(r) r dr``."""
    g = omega.grid
    return g.integrate(omega.values * TWO_PI * g.r)


def l1_mass(omega: RadialProfile) -> float:
    g = omega.grid
    return g.integrate(np.abs(omega.values) * TWO_PI * g.r)


@dataclass(frozen=True)
class ShellMasses:
    """Signed vorticity mass of the interior region and of the boundary shells."""

    interior: float
    outer: float
    inner: float | None = None


def shell_mass(omega: RadialProfile, a: float, a_inner: float | None = None) -> ShellMasses:
    """Split the signed mass at the cut ``a`` (and ``a_inner`` on the annulus).

    On the disk the regions are ``r < a`` and ``a < r < 1``.  On the annulus
    they are ``rho < r < a_inner``, ``a_inner < r < a`` and ``a < r < 1``.
    """
    geometry = omega.geometry
    lo = geometry.rmin
    if not (lo < a < 1.0):
        raise ValueError("cut radius outside the radial interval")
    g = omega.grid
    f = omega.values * TWO_PI * g.r
    total = g.integrate(f)
    below_a = g.integral_to(f, a)
    if geometry.is_annulus:
        if a_inner is None or not (lo < a_inner < a):
            raise ValueError("annulus needs an inner cut with rho < a_inner < a")
        inner = g.integral_to(f, a_inner)
        return ShellMasses(below_a - inner, total - below_a, inner)
    if a_inner is not None:
        raise ValueError("the disk has a single cut")
    return ShellMasses(below_a, total - below_a)


def _one_sided(r, f, end: str) -> float:
    # second-order one-sided derivative from three nodes
    if end == "right":
        x, y = r[-3:][::-1], f[-3:][::-1]
    else:
        x, y = r[:3], f[:3]
    h1, h2 = x[1] - x[0], x[2] - x[0]
    return float((y[1] - y[0]) * h2 / (h1 * (h2 - h1)) - (y[2] - y[0]) * h1 / (h2 * (h2 - h1)))


@dataclass(frozen=True)
class FluxResidual:
    """Measured and predicted ``n . grad w`` on each boundary circle (outer first)."""

    measured: tuple
    predicted: tuple

    @property
    def residual(self) -> tuple:
        out = []
        for m, p in zip(self.measured, self.predicted):
            out.append(abs(m - p) / abs(p) if p != 0 else abs(m))
        return tuple(out)


def boundary_flux(omega: RadialProfile, nu: float, alpha_prime, geometry: Geometry | None = None) -> FluxResidual:
    """Compare the normal vorticity derivative with ``(-1)^(j-1) |x| alpha_j' / (2 pi nu)``.

    ``alpha_prime`` is a number (disk) or a pair ``(alpha1', alpha2')``.  The
    normal points out of the domain.  Relative residuals are reported where the
    prediction is nonzero and absolute values otherwise.
    """
    geometry = geometry or omega.geometry
    if alpha_prime is None or (np.ndim(alpha_prime) == 0 and not np.isfinite(alpha_prime)):
        raise ValueError("boundary flux needs a finite alpha' (step motions have none at the jump)")
    ap = np.atleast_1d(np.asarray(alpha_prime, dtype=float))
    need = 2 if geometry.is_annulus else 1
    if ap.size != need:
        raise ValueError(f"{geometry} needs {need} alpha' value(s)")
    r, w = omega.r, omega.values
    meas = [_one_sided(r, w, "right")]
    pred = [ap[0] / (TWO_PI * nu)]
    if geometry.is_annulus:
        rho = geometry.rho
        meas.append(-_one_sided(r, w, "left"))
        pred.append(-rho * ap[1] / (TWO_PI * nu))
    return FluxResidual(tuple(meas), tuple(pred))


def boundary_decompose(u0: RadialProfile) -> tuple[RadialProfile, float]:
    """Split a disk profile as ``u00 + b f1`` with ``b = 2 pi s(1)`` and ``u00(1) = 0``."""
    if u0.geometry.is_annulus:
        raise ValueError("boundary_decompose is defined on the disk")
    b = TWO_PI * float(u0(1.0))
    u00 = u0 - f1_profile(u0.geometry, u0.grid) * b
    return u00, b


@dataclass(frozen=True, eq=False)
class DiskMeasure:
    """Interior density (w.r.t. area) plus signed atoms on the boundary circles (outer first)."""

    interior: RadialProfile
    atoms: tuple

    def total(self) -> float:
        return total_mass(self.interior) + float(sum(self.atoms))


def default_cut(nu: float, exponent: float = 0.4) -> float:
    return 1.0 - nu**exponent


@dataclass(frozen=True, eq=False)
class ConcentrationReport:
    measure: DiskMeasure
    rows: list
    predicted_atoms: tuple
    extrapolated_atoms: tuple
    interior_l1_discrepancy: float
    mass_defect: float
    converged: bool


def _richardson(nus, vals, p):
    (n1, n2), (m1, m2) = nus[-2:], vals[-2:]
    a1, a2 = n1**p, n2**p
    return (m2 * a1 - m1 * a2) / (a1 - a2)


def concentration_limit(
    u0: RadialProfile | None,
    bc: SwirlBoundaryData,
    nus: Sequence[float],
    t: float,
    cut: Callable[[float], float] | None = None,
    exponent: float = 0.4,
    grid: RadialGrid | None = None,
) -> ConcentrationReport:
    """Track the vorticity shells along a decreasing viscosity sequence.

    Shell masses use the exact identity ``2 pi int_lo^a w r dr = 2 pi [r v]``,
    so only the velocity at the cut radii is needed.  The atoms are Richardson
    extrapolated in ``nu^exponent`` from the two smallest viscosities.  Shell
    masses that do not move monotonically towards their limit flag the run as
    not converged.
    """
    nus = [float(n) for n in nus]
    if len(nus) < 2 or any(b >= a for a, b in zip(nus, nus[1:])):
        raise ValueError("need a strictly decreasing viscosity list of length >= 2")
    geometry = bc.geometry
    cut = cut or (lambda nu: default_cut(nu, exponent))
    grid = grid or default_grid(geometry)
    rho = geometry.rmin
    rows = []
    outer, inner, interior = [], [], []
    sol = None
    for nu in nus:
        sol = solve_flow(u0, bc, nu, t)
        a = cut(nu)
        v1, va = sol.velocity([1.0, a])
        total = TWO_PI * v1
        below = TWO_PI * a * va
        row = dict(nu=nu, cut=a, outer=total - below)
        if geometry.is_annulus:
            b = rho + (1.0 - a)
            vr, vb = sol.velocity([rho, b])
            inner_mass = TWO_PI * (b * vb - rho * vr)
            total -= TWO_PI * rho * vr
            row.update(inner=inner_mass, interior=below - TWO_PI * b * vb)
            inner.append(inner_mass)
        else:
            row.update(interior=below)
        row["total"] = total
        rows.append(row)
        outer.append(row["outer"])
        interior.append(row["interior"])

    predicted = _predicted_atoms(u0, bc, t)
    ext = [_richardson(nus, outer, exponent)]
    if geometry.is_annulus:
        ext.append(_richardson(nus, inner, exponent))
    for row in rows:
        row["predicted_outer"] = predicted[0]
        if geometry.is_annulus:
            row["predicted_inner"] = predicted[1]

    def monotone(seq):
        d = np.diff(seq)
        return bool(np.all(d >= -1e-12) or np.all(d <= 1e-12))

    converged = monotone(outer) and (not geometry.is_annulus or monotone(inner))

    # interior density at the smallest viscosity, compared with rot u0
    nu = nus[-1]
    a = cut(nu)
    om = sol.vorticity_profile(grid)
    if u0 is not None:
        om0 = curl(u0)
        ref = om0(grid.r) if om0.grid is not grid else om0.values
    else:
        ref = np.zeros(grid.size)
    lo_cut = rho + (1.0 - a) if geometry.is_annulus else rho
    mask = np.where((grid.r < a) & (grid.r > lo_cut), 1.0, 0.0)
    diff = RadialProfile(geometry, grid, np.abs(om.values - ref) * mask, "scalar")
    discrepancy = _masked_l1(diff, lo_cut, a)
    dens = RadialProfile(geometry, grid, om.values * mask, "scalar")
    measure = DiskMeasure(dens, tuple(ext))
    alpha_now = _alpha_total(bc, t)
    return ConcentrationReport(
        measure, rows, tuple(predicted), tuple(ext), discrepancy, abs(rows[-1]["total"] - alpha_now), converged
    )


def _masked_l1(profile: RadialProfile, lo: float, hi: float, n: int = 4096) -> float:
    # the mask is discontinuous, so integrate on a dedicated Gauss rule inside [lo, hi]
    x, w = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(lo, hi, n // 64 + 1)
    lo_e, hi_e = edges[:-1, None], edges[1:, None]
    r = (lo_e + (hi_e - lo_e) * (x + 1) / 2).ravel()
    ww = ((hi_e - lo_e) / 2 * w).ravel()
    vals = profile.grid.interp(np.abs(profile.values), r)
    return float(np.sum(ww * vals * TWO_PI * r))


def _alpha_total(bc: SwirlBoundaryData, t: float) -> float:
    if bc.geometry.is_annulus:
        rho = bc.geometry.rho
        return float(bc.alphas[0](t)) - rho**2 * float(bc.alphas[1](t))
    return float(bc.alphas[0](t))


def _left_limit(alpha, t: float) -> float:
    if alpha.is_measure:
        return float(alpha(t)) - sum(J for s, J in alpha.jump_list(t) if s == t)
    return float(alpha(t))


def _predicted_atoms(u0, bc: SwirlBoundaryData, t: float) -> list[float]:
    """Outer atom ``alpha1(t-) - 2 pi s0(1)``; inner atom ``rho^2 (2 pi s0(rho) - alpha2(t-))``."""
    geometry = bc.geometry
    s1 = float(u0(1.0)) if u0 is not None else 0.0
    out = [_left_limit(bc.alphas[0], t) - TWO_PI * s1]
    if geometry.is_annulus:
        rho = geometry.rho
        s_rho = float(u0(rho)) / rho if u0 is not None else 0.0
        out.append(rho**2 * (TWO_PI * s_rho - _left_limit(bc.alphas[1], t)))
    return out


def write_concentration_csv(path, report: ConcentrationReport) -> None:
    annulus = "inner" in report.rows[0]
    cols = ["nu", "interior_mass", "shell_mass_outer"]
    if annulus:
        cols.append("shell_mass_inner")
    cols.append("predicted_atom_outer")
    if annulus:
        cols.append("predicted_atom_inner")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in report.rows:
            vals = [row["nu"], row["interior"], row["outer"]]
            if annulus:
                vals.append(row["inner"])
            vals.append(row["predicted_outer"])
            if annulus:
                vals.append(row["predicted_inner"])
            w.writerow([repr(float(v)) for v in vals])
