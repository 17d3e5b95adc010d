"""Pressure of a swirl flow from its tangential speed.

For ``u = s(r) x^perp`` the momentum balance reduces to ``p'(r) = v(r)^2 / r``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .basis import Geometry
from .field import RadialGrid, RadialProfile

__all__ = ["PressureProfile", "pressure_from_velocity", "gradient_identity_residual", "write_pressure_csv"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class PressureProfile:
    geometry: Geometry
    grid: RadialGrid
    values: np.ndarray
    normalized: bool = True

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def __call__(self, r) -> np.ndarray:
        return self.grid.interp(self.values, r)

    def mean(self) -> float:
        return self.grid.integrate(self.values * TWO_PI * self.r) / self.geometry.area

    def as_profile(self) -> RadialProfile:
        return RadialProfile(self.geometry, self.grid, self.values, "scalar")


def _v2_over_r(u: RadialProfile) -> np.ndarray:
    r, v = u.r, u.values
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, v**2 / safe, 0.0)


def pressure_from_velocity(u: RadialProfile, normalize: bool = True) -> PressureProfile:
    """``p(r) = -int_r^1 v^2 / r' dr'``, shifted to zero mean when ``normalize``.

    On the disk the integrand ``v^2 / r`` is continued by zero at the origin,
    which ``v(0) = 0`` makes exact.
    """
    if u.kind != "velocity":
        raise ValueError("pressure needs a velocity profile")
    f = _v2_over_r(u)
    C = u.grid.cumulative(f)
    p = C - C[-1]
    out = PressureProfile(u.geometry, u.grid, p, False)
    if normalize:
        out = PressureProfile(u.geometry, u.grid, p - out.mean(), True)
    return out


def gradient_identity_residual(u: RadialProfile, p: PressureProfile) -> float:
    """``max |r p'(r) - v(r)^2| / max v^2`` over the interior grid nodes."""
    if p.grid is not u.grid and not np.array_equal(p.r, u.r):
        raise ValueError("pressure and velocity must share a grid")
    v2 = u.values**2
    scale = float(np.max(v2))
    if scale == 0.0:
        return 0.0 if not np.any(p.values) else float(np.max(np.abs(u.grid.derivative(p.values))))
    dp = u.grid.derivative(p.values)
    res = np.abs(u.r * dp - v2)[1:-1]
    return float(np.max(res) / scale)


def write_pressure_csv(path, p: PressureProfile) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "p"])
        for r, v in zip(p.r, p.values):
            w.writerow([repr(float(r)), repr(float(v))])
