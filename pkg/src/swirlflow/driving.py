"""Boundary angular velocities and integration against them.

A driving motion ``alpha(t)`` vanishes for ``t < 0``.  Four variants are
supported:

* ``smooth``: a sampler ``alpha(t)`` for ``t >= 0`` (a nonzero ``alpha(0)``
  is read as a jump at the origin),
* ``bv``: a finite list of jumps plus an absolutely continuous density,
* ``lp``: samples on a uniform time grid, interpolated piecewise linearly,
* ``brownian``: a seeded Wiener path on a uniform grid.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DrivingMotion",
    "smooth",
    "bv",
    "step",
    "ramp",
    "zero",
    "lp_samples",
    "sample_brownian",
    "parse_alpha",
    "stieltjes_integrate",
    "lp_integrate",
    "total_variation",
    "density_rule",
]

_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True, eq=False)
class DrivingMotion:
    """Boundary angular velocity ``alpha(t)``, supported in ``t >= 0``."""

    variant: str
    sampler: Callable | None = None
    density: Callable | None = None
    density_prime: Callable | None = None
    jumps: tuple = ()
    breaks: tuple = ()
    samples: np.ndarray | None = None
    dt: float | None = None
    p: float | None = None
    seed: int | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.variant not in ("smooth", "bv", "lp", "brownian"):
            raise ValueError(f"unknown driving variant {self.variant!r}")
        times = [t for t, _ in self.jumps]
        if any(t < 0 for t in times):
            raise ValueError("jump times must be >= 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("jump times must be strictly increasing")
        if self.variant in ("lp", "brownian"):
            if self.samples is None or self.dt is None or self.dt <= 0:
                raise ValueError("sampled variants need samples and a positive dt")

    @property
    def is_measure(self) -> bool:
        """True when ``d alpha`` is a finite measure (smooth or bv)."""
        return self.variant in ("smooth", "bv")

    @property
    def horizon(self) -> float:
        if self.samples is None:
            return np.inf
        return self.dt * (self.samples.size - 1)

    def _require_measure(self, what: str):
        if not self.is_measure:
            raise ValueError(f"{what} needs a smooth or bv driving motion, got {self.variant}")

    def jump_list(self, t: float, inclusive: bool = True) -> list[tuple[float, float]]:
        """Jumps at times ``<= t`` (or ``< t``), including the origin jump of a smooth motion."""
        self._require_measure("jump_list")
        out = list(self.jumps)
        if self.variant == "smooth":
            a0 = float(self.sampler(0.0))
            out = [(0.0, a0)] if a0 != 0.0 else []
        return [(s, J) for s, J in out if (s <= t if inclusive else s < t)]

    def rate(self, s) -> np.ndarray:
        """The absolutely continuous density ``a(s)`` of ``d alpha`` (zero for ``s < 0``)."""
        self._require_measure("rate")
        s = np.asarray(s, dtype=float)
        if self.density is None:
            if self.variant == "bv":
                return np.zeros_like(s)
            h = 1e-5
            val = (self.sampler(s + h) - self.sampler(np.maximum(s - h, 0.0))) / (s + h - np.maximum(s - h, 0.0))
        else:
            val = np.asarray(self.density(s), dtype=float) * np.ones_like(s)
        return np.where(s >= 0, val, 0.0)

    def rate_prime(self, s) -> np.ndarray:
        self._require_measure("rate_prime")
        s = np.asarray(s, dtype=float)
        if self.density_prime is not None:
            return np.asarray(self.density_prime(s), dtype=float) * np.ones_like(s)
        if self.density is None and self.variant == "bv":
            return np.zeros_like(s)
        h = 1e-4 * np.maximum(1.0, np.abs(s))
        lo = np.maximum(s - h, 0.0)
        return (self.rate(s + h) - self.rate(lo)) / (s + h - lo)

    def __call__(self, t) -> np.ndarray | float:
        """Value ``alpha(t)`` (right-continuous at jumps)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if self.variant == "smooth":
            out = np.where(t_arr >= 0, np.asarray(self.sampler(np.maximum(t_arr, 0.0)), dtype=float), 0.0)
        elif self.variant == "bv":
            out = np.array([self._bv_value(x) for x in t_arr])
        else:
            if np.any(t_arr > self.horizon + 1e-12):
                raise ValueError("time beyond the sampled horizon")
            grid = self.dt * np.arange(self.samples.size)
            out = np.where(t_arr >= 0, np.interp(t_arr, grid, self.samples), 0.0)
        return out if np.ndim(t) else float(out[0])

    def _bv_value(self, t: float) -> float:
        if t < 0:
            return 0.0
        v = sum(J for s, J in self.jumps if s <= t)
        if self.density is not None and t > 0:
            s, w = density_rule(self, t, graded=False)
            v += float(np.dot(w, self.rate(s)))
        return v


def smooth(sampler: Callable, derivative: Callable | None = None, label: str = "") -> DrivingMotion:
    return DrivingMotion("smooth", sampler=sampler, density=derivative, label=label)


def bv(
    jumps: Sequence[tuple[float, float]] = (),
    density: Callable | None = None,
    density_prime: Callable | None = None,
    breaks: Sequence[float] = (),
    label: str = "",
) -> DrivingMotion:
    jumps = tuple((float(t), float(J)) for t, J in jumps)
    return DrivingMotion(
        "bv", density=density, density_prime=density_prime, jumps=jumps, breaks=tuple(breaks), label=label
    )


def step(time: float = 0.0, size: float = 1.0) -> DrivingMotion:
    """``size`` times the indicator of ``[time, inf)``."""
    return bv([(time, size)], label="step")


def ramp(slope: float = 1.0) -> DrivingMotion:
    """``alpha(t) = slope * t`` for ``t >= 0``."""
    slope = float(slope)
    return smooth(
        lambda t: slope * np.asarray(t, dtype=float),
        derivative=lambda t: slope * np.ones_like(np.asarray(t, dtype=float)),
        label=f"ramp:{slope:g}",
    )


def zero() -> DrivingMotion:
    return bv([], label="zero")


def lp_samples(values, dt: float, p: float = 1.0) -> DrivingMotion:
    """An ``L^p`` motion given by samples at ``t = 0, dt, 2 dt, ...``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return DrivingMotion("lp", samples=np.asarray(values, dtype=float), dt=float(dt), p=float(p), label="lp")


def sample_brownian(seed: int, T: float, dt: float) -> DrivingMotion:
    """Seeded Wiener path on ``[0, T]`` with ``omega(0) = 0`` and ``N(0, dt)`` increments."""
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    n = int(round(T / dt))
    inc = np.random.default_rng(seed).normal(0.0, np.sqrt(dt), n)
    path = np.concatenate([[0.0], np.cumsum(inc)])
    return DrivingMotion("brownian", samples=path, dt=float(dt), seed=seed, label=f"brownian:{seed}")


def parse_alpha(spec: str, horizon: float = 1.0, dt: float = 1e-3) -> DrivingMotion:
    """Parse ``step``, ``zero``, ``ramp:slope``, ``jumps:[(t,J),...]`` or ``brownian:seed``."""
    spec = spec.strip()
    head, _, arg = spec.partition(":")
    head = head.strip().lower()
    try:
        if head == "step" and not arg:
            return step()
        if head == "zero" and not arg:
            return zero()
        if head == "ramp":
            return ramp(float(arg) if arg else 1.0)
        if head == "jumps":
            items = ast.literal_eval(arg)
            return bv([(float(t), float(J)) for t, J in items], label=spec)
        if head == "brownian":
            return sample_brownian(int(arg), horizon, dt)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ValueError(f"malformed alpha spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown alpha spec {spec!r}")


def _panels(edges):
    x, w = _GL16
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    return (lo + (hi - lo) * (x + 1) / 2).ravel(), ((hi - lo) / 2 * w).ravel()


def density_rule(alpha: DrivingMotion, t: float, graded: bool = True, n_uniform: int = 32, depth: int = 40):
    """Composite Gauss rule on ``[0, t]`` for integrals against the density of ``alpha``.

    Panel edges include the motion's breakpoints; with ``graded=True`` they are
    also refined geometrically towards ``s = t`` (down to ``t 2^-depth``) so
    that kernels like ``exp(-mu (t - s))`` are resolved for any ``mu``.
    """
    edges = set(np.linspace(0.0, t, n_uniform + 1))
    edges.update(b for b in alpha.breaks if 0 < b < t)
    if graded:
        gap = t / n_uniform
        edges.update(t - gap * 0.5 ** np.arange(1, depth))
    return _panels(sorted(edges))


def stieltjes_integrate(F: Callable, alpha: DrivingMotion, t: float, vectorized: bool = False) -> np.ndarray:
    """``int_{[0,t]} F(s) d alpha(s)``: jump sum plus quadrature against the density.

    A jump exactly at ``s = t`` is included.  ``F`` maps a time to a weight
    vector; with ``vectorized=True`` it maps an array of times to an array of
    shape ``(n_times, ...)``.
    """
    if not alpha.is_measure:
        raise ValueError(f"{alpha.variant} motions have no Stieltjes integral")
    jumps = alpha.jump_list(t)
    total = 0.0
    for s, J in jumps:
        total = total + _eval(F, s, vectorized) * J
    if t > 0 and (alpha.variant == "smooth" or alpha.density is not None):
        s, w = density_rule(alpha, t, graded=False)
        vals = _eval_many(F, s, vectorized)
        a = alpha.rate(s)
        total = total + np.tensordot(w * a, vals, axes=(0, 0))
    return np.asarray(total, dtype=float)


def _eval(F, s, vectorized):
    if vectorized:
        return np.asarray(F(np.array([s])), dtype=float)[0]
    return np.asarray(F(s), dtype=float)


def _eval_many(F, s, vectorized):
    if vectorized:
        return np.asarray(F(s), dtype=float)
    return np.array([np.asarray(F(x), dtype=float) for x in s])


def lp_integrate(
    F: Callable,
    alpha: DrivingMotion,
    t: float,
    delta: float = 1.0,
    n_panels: int = 256,
    vectorized: bool = False,
    lag: bool = False,
) -> np.ndarray:
    """``int_0^t F(s) alpha(s) ds`` for ``F`` allowed to blow up like ``(t - s)^(delta - 1)``.

    The substitution ``t - s = t u^g`` with ``g = 1 / delta`` cancels the
    endpoint power exactly, leaving a smooth integrand in ``u``; the ``u``
    interval is split into ``n_panels`` equal panels of 16 Gauss nodes each.

    With ``lag=True`` the integrand is called with the lag ``t - s`` instead of
    ``s``.  Near the singular end ``s`` itself cannot resolve lags below about
    ``1e-16 t``, so strongly singular integrands should be supplied this way;
    otherwise nodes whose lag rounds to zero are dropped.
    """
    if not (delta > 0):
        raise ValueError("nonintegrable endpoint singularity: delta must be > 0")
    if t <= 0:
        return np.asarray(0.0 * _eval(F, 0.0, vectorized))
    g = max(1.0, 1.0 / delta)
    u, wu = _panels(np.linspace(0.0, 1.0, n_panels + 1))
    x = t * u**g
    wx = wu * t * g * u ** (g - 1)
    s = t - x
    if not lag:
        keep = s < t
        s, x, wx = s[keep], x[keep], wx[keep]
    vals = _eval_many(F, x if lag else s, vectorized)
    a = np.asarray(alpha(s), dtype=float)
    return np.asarray(np.tensordot(wx * a, vals, axes=(0, 0)), dtype=float)


def total_variation(alpha: DrivingMotion, t: float) -> float:
    """Total variation of ``alpha`` on ``[0, t]`` (jump masses plus ``int |a|``)."""
    if not alpha.is_measure:
        raise ValueError(f"{alpha.variant} motions have no total variation here")
    tv = sum(abs(J) for _, J in alpha.jump_list(t))
    if t > 0 and (alpha.variant == "smooth" or alpha.density is not None):
        s, w = density_rule(alpha, t, graded=False)
        tv += float(np.dot(w, np.abs(alpha.rate(s))))
    return tv
