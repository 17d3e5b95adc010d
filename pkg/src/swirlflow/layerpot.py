"""Heat double-layer potentials for swirl fields on the unit disk.

Time is measured in units of ``nu t`` throughout, so the kernels are those of
the plain heat equation.  For a density ``h(s) y^perp`` on the unit circle the
double-layer potential (normal derivative of the heat kernel taken along the
inward normal) has tangential component

    Dh(t, r) = int_0^t k_D(t - s, r) h(s) ds,

    k_D(tau, r) = e^{-(1-r)^2 / 4 tau} / (8 tau^2)
                  * [2 Ie_1(a) - r (Ie_0(a) + Ie_2(a))],   a = r / (2 tau),

with ``Ie_n`` the exponentially scaled modified Bessel functions.  It comes
from integrating ``(1 - x.y) exp(-|x-y|^2 / 4 tau) / (8 pi tau^2)`` against
the projection ``cos(theta)`` of the source tangent onto the target tangent.
As ``r -> 1`` the potential jumps to ``h / 2 + Nh`` where ``N`` has the
continuous kernel ``k_N(tau) = k_D(tau, 1)``, weakly singular like
``1 / (4 sqrt(pi tau))``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

from .driving import DrivingMotion, density_rule

__all__ = [
    "BoundaryDensity",
    "LayerSolution",
    "BIEDivergence",
    "reduced_kernel",
    "reduced_kernel_closed",
    "boundary_kernel",
    "interior_kernel",
    "time_grid",
    "solve_bie",
    "apply_N",
    "double_layer_eval",
    "boundary_limit",
    "neumann_partial",
    "leading_term",
    "step_leading",
    "duhamel_leading",
    "write_layer_csv",
]

_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)
_ASYM_SWITCH = 60.0
_ASYM_TERMS = 24


def _hankel_coeffs(n: int, terms: int) -> np.ndarray:
    """Coefficients of ``e^{-z} I_n(z) sqrt(2 pi z) ~ sum_k c_k z^-k``."""
    c = np.empty(terms)
    a = 1.0
    for k in range(terms):
        if k > 0:
            a *= (4 * n * n - (2 * k - 1) ** 2) / (8.0 * k)
        c[k] = (-1) ** k * a
    return c


_C0, _C1, _C2 = (_hankel_coeffs(n, _ASYM_TERMS) for n in (0, 1, 2))


def _combo(a: np.ndarray, r: np.ndarray, omr: np.ndarray) -> np.ndarray:
    """``2 Ie_1(a) - r (Ie_0(a) + Ie_2(a))`` without cancellation for large ``a``."""
    out = np.empty(np.broadcast(a, r).shape)
    a, r, omr = np.broadcast_arrays(a, r, omr)
    small = a < _ASYM_SWITCH
    if np.any(small):
        aa, rr = a[small], r[small]
        out[small] = 2.0 * special.ive(1, aa) - rr * (special.ive(0, aa) + special.ive(2, aa))
    big = ~small
    if np.any(big):
        aa, rr, om = a[big], r[big], omr[big]
        # k = 0 term is 2 - 2r, kept exact via 1 - r
        s = 2.0 * om
        coeff = 2.0 * _C1[1:] - rr[:, None] * (_C0[1:] + _C2[1:])
        powers = aa[:, None] ** -np.arange(1, _ASYM_TERMS)
        s = s + np.sum(coeff * powers, axis=1)
        out[big] = s / np.sqrt(2.0 * np.pi * aa)
    return out


def interior_kernel(tau, r, omr=None) -> np.ndarray:
    """Reduced interior kernel ``k_D(tau, r)``; pass ``omr = 1 - r`` for radii near 1."""
    tau = np.asarray(tau, dtype=float)
    r = np.asarray(r, dtype=float)
    omr = 1.0 - r if omr is None else np.asarray(omr, dtype=float)
    out = np.zeros(np.broadcast(tau, r).shape)
    tau_b, r_b, omr_b = np.broadcast_arrays(tau, r, omr)
    pos = tau_b > 0
    t, rr, om = tau_b[pos], r_b[pos], omr_b[pos]
    a = rr / (2.0 * t)
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-(om**2) / (4.0 * t)) / (8.0 * t**2) * _combo(a, rr, om)
    return out


def boundary_kernel(tau) -> np.ndarray:
    """Kernel ``k_N(tau) = k_D(tau, 1)`` of the boundary operator ``N`` on swirl densities."""
    tau = np.asarray(tau, dtype=float)
    return interior_kernel(tau, np.ones_like(tau), np.zeros_like(tau))


def _phi(lam):
    return lam**2 * np.exp(-(lam**2))


@lru_cache(maxsize=None)
def _theta_edges(tau: float) -> np.ndarray:
    # the integrand peaks where 2 sin(theta/2) ~ 2 sqrt(tau)
    peak = min(2.0 * np.sqrt(tau), np.pi / 2)
    inner = peak * 2.0 ** np.arange(-8, 5)
    inner = inner[inner < np.pi]
    return np.unique(np.concatenate([[0.0], inner, np.linspace(inner[-1], np.pi, 9)]))


def reduced_kernel(tau: float, m: int = 0) -> float:
    """Circle-averaged kernel ``(1 / 8 pi tau) int_0^{2 pi} Phi(2 sin(theta/2) / sqrt(4 tau)) cos(m theta) d theta``.

    ``Phi(l) = l^2 exp(-l^2)``.  The angle integral uses 16-point Gauss panels
    refined geometrically around the peak at ``theta ~ 2 sqrt(tau)`` (over 300
    nodes on the half circle).  ``m = 0`` gives the plain circle average;
    ``m = 1`` projects onto the swirl direction, and ``2 K_1`` is the kernel of
    ``N`` acting on swirl densities.
    """
    if not (tau > 0) or not np.isfinite(tau):
        raise ValueError("tau must be positive and finite")
    x, w = _GL16
    e = _theta_edges(float(tau))
    lo, hi = e[:-1, None], e[1:, None]
    th = (lo + (hi - lo) * (x + 1) / 2).ravel()
    wt = ((hi - lo) / 2 * w).ravel()
    lam = 2.0 * np.sin(th / 2.0) / np.sqrt(4.0 * tau)
    val = 2.0 * np.sum(wt * _phi(lam) * np.cos(m * th))
    return float(val / (8.0 * np.pi * tau))


def reduced_kernel_closed(tau, m: int = 0):
    """Closed form ``(1 / 8 tau^2) [Ie_m(b) - (Ie_{m-1}(b) + Ie_{m+1}(b)) / 2]``, ``b = 1 / (2 tau)``."""
    tau = np.asarray(tau, dtype=float)
    b = 1.0 / (2.0 * tau)
    return (special.ive(m, b) - 0.5 * (special.ive(abs(m - 1), b) + special.ive(m + 1, b))) / (8.0 * tau**2)


def time_grid(T: float, n: int = 512, smallest: float = 1e-9) -> np.ndarray:
    """``0`` followed by ``n - 1`` geometrically spaced times from ``smallest * T`` to ``T``."""
    if T <= 0:
        raise ValueError("T must be positive")
    return np.concatenate([[0.0], T * np.geomspace(smallest, 1.0, n - 1)])


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """Amplitude of a swirl density on the unit circle, piecewise linear on a time grid.

    ``values[0]`` is the right limit at ``t = 0``; the density vanishes for ``t < 0``.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times[0] != 0.0:
            raise ValueError("density needs matching arrays on a grid starting at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")

    @classmethod
    def step(cls, value: float = 1.0 / (2.0 * np.pi), T: float = 1e-2, n: int = 512) -> "BoundaryDensity":
        t = time_grid(T, n)
        return cls(t, np.full(t.shape, float(value)))

    @classmethod
    def from_function(cls, func, T: float, n: int = 512) -> "BoundaryDensity":
        t = time_grid(T, n)
        return cls(t, np.asarray(func(t), dtype=float) * np.ones_like(t))

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.times, self.values)
        return np.where(t < 0, 0.0, out)

    def with_values(self, values) -> "BoundaryDensity":
        return BoundaryDensity(self.times, np.asarray(values, dtype=float))


@lru_cache(maxsize=8)
def _n_matrix_cached(key: bytes, n: int) -> np.ndarray:
    times = np.frombuffer(key, dtype=float)
    return _build_n_matrix(times)


def _build_n_matrix(times: np.ndarray) -> np.ndarray:
    """Product-integration matrix of ``N`` for piecewise-linear densities.

    Row ``n`` holds the weights of ``int_0^{t_n} k_N(t_n - s) h(s) ds``.  On
    each interval the substitution ``u = sqrt(t_n - s)`` absorbs the
    ``tau^{-1/2}`` singularity, so an 8-point Gauss rule in ``u`` is accurate.
    """
    n = times.size
    W = np.zeros((n, n))
    x, w = _GL8
    for i in range(1, n):
        tn = times[i]
        s0, s1 = times[:i], times[1 : i + 1]
        ua, ub = np.sqrt(tn - s1), np.sqrt(tn - s0)
        u = ua[:, None] + (ub - ua)[:, None] * (x + 1) / 2
        wu = (ub - ua)[:, None] / 2 * w
        tau = u**2
        s = tn - tau
        kern = boundary_kernel(tau) * 2.0 * u * wu
        h = (s1 - s0)[:, None]
        lam = (s - s0[:, None]) / h
        W[i, :i] += np.sum(kern * (1.0 - lam), axis=1)
        W[i, 1 : i + 1] += np.sum(kern * lam, axis=1)
    return W


def n_matrix(times: np.ndarray) -> np.ndarray:
    times = np.ascontiguousarray(times, dtype=float)
    return _n_matrix_cached(times.tobytes(), times.size)


def apply_N(h: BoundaryDensity) -> BoundaryDensity:
    return h.with_values(n_matrix(h.times) @ h.values)


class BIEDivergence(RuntimeError):
    """The Neumann series for the boundary equation does not converge."""


@dataclass(frozen=True, eq=False)
class LayerSolution:
    density: BoundaryDensity
    residual: float
    mode: str
    terms: int | None = None


def neumann_partial(g: BoundaryDensity, k: int) -> BoundaryDensity:
    """``g_k = sum_{j <= k} (-2N)^j g``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    W = n_matrix(g.times)
    term = g.values.copy()
    total = term.copy()
    for _ in range(k):
        term = -2.0 * (W @ term)
        total += term
    return g.with_values(total)


def solve_bie(g: BoundaryDensity, mode: str = "stepping", k: int = 6) -> LayerSolution:
    """Solve ``(I/2 + N) h = g`` on the density's time grid.

    ``stepping`` marches the lower-triangular product-integration system.
    ``series`` sums ``h = 2 sum_{j <= k} (-2N)^j g`` (``k <= 6``) and first
    checks that ``||2N||`` is below one on the grid.
    """
    W = n_matrix(g.times)
    if mode == "stepping":
        n = g.times.size
        h = np.zeros(n)
        for i in range(n):
            acc = W[i, :i] @ h[:i]
            h[i] = (g.values[i] - acc) / (0.5 + W[i, i])
        terms = None
    elif mode == "series":
        if not (0 <= k <= 6):
            raise ValueError("series order is capped at 6; use stepping beyond that")
        norm2N = 2.0 * float(np.max(np.sum(np.abs(W), axis=1)))
        if norm2N >= 1.0:
            raise BIEDivergence(f"||2N|| = {norm2N:.3f} >= 1 on [0, {g.T:g}]; the series diverges")
        term = g.values.copy()
        total = term.copy()
        prev = np.max(np.abs(term))
        for _ in range(k):
            term = -2.0 * (W @ term)
            cur = np.max(np.abs(term))
            if cur > prev:
                raise BIEDivergence("series term grew; Neumann series diverges")
            prev = cur
            total += term
        h = 2.0 * total
        terms = k
    else:
        raise ValueError(f"unknown BIE mode {mode!r}")
    res = float(np.max(np.abs(0.5 * h + W @ h - g.values)))
    return LayerSolution(g.with_values(h), res, mode, terms)


def _u_rule(t: float, omr: float):
    """Gauss rule in ``u = sqrt(tau)`` on ``[0, sqrt(t)]`` refined around ``u ~ 1 - r``."""
    x, w = _GL16
    ut = np.sqrt(t)
    scale = max(omr, 1e-300)
    lo = min(0.05 * scale, ut)
    edges = [lo]
    e = lo
    while e < ut:
        e = min(e * 1.6, ut)
        edges.append(e)
    edges = np.asarray(edges)
    if edges.size < 2:
        edges = np.array([0.0, ut])
    a, b = edges[:-1, None], edges[1:, None]
    u = (a + (b - a) * (x + 1) / 2).ravel()
    wu = ((b - a) / 2 * w).ravel()
    return u, wu


def double_layer_eval(h: BoundaryDensity, t: float, r, omr=None) -> np.ndarray:
    """Tangential component of ``Dh`` at time ``t`` and radii ``r < 1``.

    The time integral uses ``u = sqrt(t - s)`` with Gauss panels refined
    geometrically around ``u ~ 1 - r``, where the kernel concentrates.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    omr = 1.0 - r if omr is None else np.atleast_1d(np.asarray(omr, dtype=float))
    if np.any(omr <= 0):
        raise ValueError("double_layer_eval needs r < 1; use boundary_limit for the trace")
    if t <= 0:
        return np.zeros(r.shape)
    if t > h.T * (1 + 1e-12):
        raise ValueError("evaluation time beyond the density's grid")
    out = np.empty(r.shape)
    for i, (ri, oi) in enumerate(zip(r, omr)):
        u, wu = _u_rule(t, oi)
        tau = u**2
        k = interior_kernel(tau, ri, oi)
        out[i] = np.sum(wu * 2.0 * u * k * h(t - tau))
    return out


def boundary_limit(h: BoundaryDensity) -> BoundaryDensity:
    """Interior trace ``h / 2 + Nh`` on the density's grid."""
    return h.with_values(0.5 * h.values + n_matrix(h.times) @ h.values)


def leading_term(g: BoundaryDensity, t: float, r, k: int = 0) -> np.ndarray:
    """``2 D g_k`` with ``g_k = sum_{j <= k} (-2N)^j g``."""
    return 2.0 * double_layer_eval(neumann_partial(g, k), t, r)


def step_leading(tau: float, r, omr=None) -> np.ndarray:
    """``2 D g`` for the step trace ``g = 1 / 2 pi`` of ``f1``, at time ``tau``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    omr = 1.0 - r if omr is None else np.atleast_1d(np.asarray(omr, dtype=float))
    if tau <= 0:
        return np.zeros(r.shape)
    out = np.empty(r.shape)
    for i, (ri, oi) in enumerate(zip(r, omr)):
        u, wu = _u_rule(tau, oi)
        out[i] = np.sum(wu * 2.0 * u * interior_kernel(u**2, ri, oi)) / np.pi
    return out


def duhamel_leading(alpha: DrivingMotion, nu: float, t: float, r) -> np.ndarray:
    """``2 int_0^t Dg(nu (t - s), r) d alpha(s)`` for a bv motion.

    Each unit jump at ``s`` contributes the step response ``2 D g`` at the
    rescaled time ``nu (t - s)``; the density part is integrated with the
    graded rule of :func:`swirlflow.driving.density_rule`.
    """
    if not alpha.is_measure:
        raise ValueError("duhamel_leading needs a smooth or bv motion")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros(r.shape)
    for s, J in alpha.jump_list(t):
        out += J * step_leading(nu * (t - s), r)
    if t > 0 and (alpha.variant == "smooth" or alpha.density is not None):
        s, w = density_rule(alpha, t, graded=True, depth=20)
        a = alpha.rate(s)
        for si, wi, ai in zip(s, w, a):
            if ai != 0.0:
                out += wi * ai * step_leading(nu * (t - si), r)
    return out


def write_layer_csv(path, rows: Sequence[dict]) -> None:
    cols = ("t", "r", "value_layer", "value_spectral", "abs_err")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([repr(float(row[c])) for c in cols])
