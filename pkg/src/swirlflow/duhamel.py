"""Boundary-driven swirl flow: free decay plus the Duhamel/Stieltjes forced part.

The velocity at time ``t`` is ``e^{nu t A} u0 + S alpha(t)`` where, for every
forcing field ``F`` (``f1`` on the disk; two combinations of ``f1`` and ``f2``
on the annulus) driven by its motion ``alpha_F``, the forced part has
coefficients ``c_k^F int (1 - exp(-nu lambda_k (t - s))) d alpha_F(s)``.

For synthesis the forced part is split as

    S = sum_F [alpha_F(t) F - (a_F(t)/nu) Z1_F + (a_F'(t)/nu^2) Z2_F] + w,

with ``a_F`` the density of ``d alpha_F``, ``Z1_F = (-A)^{-1} F`` and
``Z2_F = (-A)^{-2} F`` in closed form.  The first three terms carry the exact
boundary trace and the slowly decaying part of the spectrum; the remainder
``w`` vanishes on the boundary and its coefficients decay fast.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .basis import DISK, EigenBasis, Geometry, _cyl, _jn, annulus, basis_for
from .driving import DrivingMotion, density_rule, lp_integrate, zero
from .field import (
    NormSpec,
    RadialGrid,
    RadialProfile,
    SpectralField,
    default_grid,
    gagliardo_seminorm,
    lebesgue_norm,
    to_spectral,
)

__all__ = [
    "ClosedSwirl",
    "Forcing",
    "HarmonicPair",
    "SwirlBoundaryData",
    "SwirlSolution",
    "f1_profile",
    "f2_profile",
    "F1",
    "F2",
    "forcing_fields",
    "harmonic_interpolant",
    "disk_data",
    "annulus_data",
    "choose_modes",
    "harmonic_tail",
    "solve",
    "solve_flow",
    "sweep",
    "write_sweep_csv",
    "SWEEP_COLUMNS",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ClosedSwirl:
    """Tangential speed ``sum a_n r^n + B / r + C r log r`` in closed form."""

    powers: tuple = ()
    inv: float = 0.0
    rlog: float = 0.0

    def _pw(self) -> dict:
        return dict(self.powers)

    def __add__(self, other: "ClosedSwirl") -> "ClosedSwirl":
        p = self._pw()
        for n, a in other.powers:
            p[n] = p.get(n, 0.0) + a
        return ClosedSwirl(tuple(sorted(p.items())), self.inv + other.inv, self.rlog + other.rlog)

    def __mul__(self, c: float) -> "ClosedSwirl":
        c = float(c)
        return ClosedSwirl(tuple((n, a * c) for n, a in self.powers), self.inv * c, self.rlog * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * -1.0

    def velocity(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for n, a in self.powers:
            out = out + a * r**n
        if self.inv:
            out = out + self.inv / r
        if self.rlog:
            out = out + self.rlog * np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return out

    def curl(self, r) -> np.ndarray:
        """``v' + v / r``; ``B/r`` contributes nothing and ``r log r`` gives ``2 log r + 1``."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for n, a in self.powers:
            out = out + a * (n + 1) * r ** (n - 1)
        if self.rlog:
            out = out + self.rlog * (2.0 * np.log(r) + 1.0)
        return out

    def curl_dr(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for n, a in self.powers:
            if n != 1:
                out = out + a * (n + 1) * (n - 1) * r ** (n - 2)
        if self.rlog:
            out = out + 2.0 * self.rlog / r
        return out

    def norm_sq(self, geometry: Geometry) -> float:
        x, w = np.polynomial.legendre.leggauss(64)
        a = geometry.rmin
        r = a + (1 - a) * (x + 1) / 2
        return float(np.sum(w * (1 - a) / 2 * self.velocity(r) ** 2 * TWO_PI * r))


def _fit_harmonic(p: ClosedSwirl, rho: float) -> ClosedSwirl:
    # add A r + B / r so that the sum vanishes at r = rho and r = 1
    M = np.array([[1.0, 1.0], [rho, 1.0 / rho]])
    rhs = -np.array([p.velocity(1.0), p.velocity(rho)], dtype=float)
    A, B = np.linalg.solve(M, rhs)
    return p + ClosedSwirl(((1, A),), inv=B)


F1_SWIRL = ClosedSwirl(((1, 1.0 / TWO_PI),))
F2_SWIRL = ClosedSwirl(inv=1.0 / TWO_PI)


@dataclass(frozen=True, eq=False)
class Forcing:
    """A harmonic forcing field with its quasi-static correctors and spectral coefficients.

    ``f1_weight`` and ``f2_weight`` express the field as a combination of
    ``f1 = x^perp / 2 pi`` and ``f2 = x^perp / (2 pi |x|^2)``.
    """

    field: ClosedSwirl
    z1: ClosedSwirl
    z2: ClosedSwirl | None
    f1_weight: float
    f2_weight: float

    def coeffs(self, basis: EigenBasis) -> np.ndarray:
        kap, N = basis.sqrt_lam, basis.norms
        if not basis.geometry.is_annulus:
            return self.f1_weight * N * special.jv(2, kap) / kap
        rho = basis.geometry.rho
        j1, y1 = basis._inner
        c1 = N * (_cyl(2, kap, j1, y1) - rho**2 * _cyl(2, kap * rho, j1, y1)) / kap
        c2 = N * (_cyl(0, kap * rho, j1, y1) - _cyl(0, kap, j1, y1)) / kap
        return self.f1_weight * c1 + self.f2_weight * c2


def _disk_forcing() -> Forcing:
    z1 = ClosedSwirl(((1, 1.0 / (16 * np.pi)), (3, -1.0 / (16 * np.pi))))
    z2 = ClosedSwirl(((1, 1.0 / (192 * np.pi)), (3, -1.0 / (128 * np.pi)), (5, 1.0 / (384 * np.pi))))
    return Forcing(F1_SWIRL, z1, z2, 1.0, 0.0)


def _annulus_forcing(rho: float) -> tuple[Forcing, Forcing]:
    z1_f1 = _fit_harmonic(ClosedSwirl(((3, -1.0 / (16 * np.pi)),)), rho)
    z1_f2 = _fit_harmonic(ClosedSwirl(rlog=-1.0 / (4 * np.pi)), rho)
    d = 1.0 - rho**2
    # outer driver (f1 - rho^2 f2)/(1 - rho^2), inner driver -rho^2 (f1 - f2)/(1 - rho^2)
    w_out = (1.0 / d, -(rho**2) / d)
    w_in = (-(rho**2) / d, rho**2 / d)
    out = []
    for a, b in (w_out, w_in):
        out.append(Forcing(F1_SWIRL * a + F2_SWIRL * b, z1_f1 * a + z1_f2 * b, None, a, b))
    return tuple(out)


def forcing_fields(geometry: Geometry) -> tuple[Forcing, ...]:
    """Forcing fields in the order of the boundary motions (outer circle first)."""
    if geometry.is_annulus:
        return _annulus_forcing(geometry.rho)
    return (_disk_forcing(),)


def F1(geometry: Geometry) -> ClosedSwirl:
    return forcing_fields(geometry)[0].field


def F2(geometry: Geometry) -> ClosedSwirl:
    if not geometry.is_annulus:
        raise ValueError("the inner forcing field exists only on the annulus")
    return forcing_fields(geometry)[1].field


def f1_profile(geometry: Geometry = DISK, grid: RadialGrid | None = None) -> RadialProfile:
    """Tangential speed ``r / 2 pi`` of the rigid rotation ``f1``."""
    grid = grid or default_grid(geometry)
    return RadialProfile(geometry, grid, grid.r / TWO_PI, "velocity")


def f2_profile(geometry: Geometry, grid: RadialGrid | None = None) -> RadialProfile:
    """Tangential speed ``1 / (2 pi r)`` of the point-vortex field ``f2`` (annulus only)."""
    if not geometry.is_annulus:
        raise ValueError("f2 is singular at the origin; annulus only")
    grid = grid or default_grid(geometry)
    return RadialProfile(geometry, grid, 1.0 / (TWO_PI * grid.r), "velocity")


@dataclass(frozen=True)
class HarmonicPair:
    """Weights of ``beta1 f1 + beta2 f2`` matching both boundary angular velocities."""

    beta1: float
    beta2: float
    rho: float

    def swirl(self) -> ClosedSwirl:
        return F1_SWIRL * self.beta1 + F2_SWIRL * self.beta2


def harmonic_interpolant(alpha1: float, alpha2: float, rho: float) -> HarmonicPair:
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie in (0, 1)")
    beta2 = rho**2 * (alpha2 - alpha1) / (1.0 - rho**2)
    return HarmonicPair(alpha1 - beta2, beta2, rho)


@dataclass(frozen=True, eq=False)
class SwirlBoundaryData:
    """Boundary motions: ``(alpha,)`` on the disk, ``(alpha1, alpha2)`` on the annulus."""

    geometry: Geometry
    alphas: tuple

    def __post_init__(self):
        need = 2 if self.geometry.is_annulus else 1
        if len(self.alphas) != need:
            raise ValueError(f"{self.geometry} needs {need} driving motion(s)")
        for a in self.alphas:
            if not isinstance(a, DrivingMotion):
                raise TypeError("boundary data must be DrivingMotion instances")


def disk_data(alpha: DrivingMotion) -> SwirlBoundaryData:
    return SwirlBoundaryData(DISK, (alpha,))


def annulus_data(alpha1: DrivingMotion, alpha2: DrivingMotion, rho: float) -> SwirlBoundaryData:
    return SwirlBoundaryData(annulus(rho), (alpha1, alpha2))


def _chunked_synth(basis: EigenBasis, r: np.ndarray, coeffs: np.ndarray, kind: str) -> np.ndarray:
    out = np.zeros(r.shape)
    # trailing modes below 1e-20 of the largest (times kappa^2 for derivatives) cannot matter
    weight = np.abs(coeffs) * (basis.sqrt_lam**2 if kind == "dcurl" else basis.sqrt_lam)
    big = np.nonzero(weight > 1e-20 * weight.max())[0] if weight.size and weight.max() > 0 else []
    if len(big) == 0:
        return out
    n = int(big[-1]) + 1
    step = max(1, int(4e6 // max(r.size, 1)))
    for s in range(0, n, step):
        sl = slice(s, min(s + step, n))
        out += _cols(basis, r, sl, kind) @ coeffs[sl]
    return out


def _cols(basis: EigenBasis, r, sl: slice, kind: str) -> np.ndarray:
    kap = basis.sqrt_lam[sl]
    N = basis.norms[sl]
    x = np.multiply.outer(r, kap)
    if basis.geometry.is_annulus:
        j1, y1 = (a[sl] for a in basis._inner)
        z = lambda n: _cyl(n, x, j1, y1)  # noqa: E731
    else:
        z = lambda n: _jn(n, x)  # noqa: E731
    if kind == "velocity":
        return z(1) * N
    if kind == "curl":
        return z(0) * (kap * N)
    # radial derivative of the vorticity: -kappa^2 Z1
    return -z(1) * (kap**2 * N)


def choose_modes(geometry: Geometry, nu: float, tau: float, floor: int = 512, cap: int = 16384) -> int:
    """Mode count with ``nu lambda_K tau >= 40`` (so ``exp(-nu lambda_K tau) < 5e-18``)."""
    if nu <= 0 or tau <= 0 or not np.isfinite(tau):
        return floor
    kappa = np.sqrt(40.0 / (nu * tau))
    K = int(np.ceil(kappa * (1.0 - geometry.rmin) / np.pi)) + 4
    return int(min(cap, max(floor, K)))


@dataclass(frozen=True, eq=False)
class SwirlSolution:
    """Solution at one ``(nu, t)``.

    ``closed`` is the analytic part of the forced flow, ``w_forced`` the modal
    remainder of the forced flow, ``w_free`` the coefficients of
    ``e^{nu t A} u0`` and ``forced_full`` the full forced coefficients
    ``S_k`` on the same modes.
    """

    geometry: Geometry
    nu: float
    t: float
    basis: EigenBasis
    closed: ClosedSwirl
    w_forced: np.ndarray
    w_free: np.ndarray
    forced_full: np.ndarray
    harmonic_now: ClosedSwirl
    u0: RadialProfile | None = None
    u0_coeffs: np.ndarray | None = field(default=None, repr=False)
    form: str = "stieltjes"

    def _parts(self, r, free: bool, forced: bool, what: str):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros(r.shape)
        kind = {"v": "velocity", "c": "curl", "d": "dcurl"}[what]
        if forced:
            fn = {"v": self.closed.velocity, "c": self.closed.curl, "d": self.closed.curl_dr}[what]
            out += fn(r)
            out += _chunked_synth(self.basis, r, self.w_forced, kind)
        if free:
            out += _chunked_synth(self.basis, r, self.w_free, kind)
        return out

    def velocity(self, r, free: bool = True, forced: bool = True) -> np.ndarray:
        return self._parts(r, free, forced, "v")

    def vorticity(self, r, free: bool = True, forced: bool = True) -> np.ndarray:
        return self._parts(r, free, forced, "c")

    def vorticity_dr(self, r, free: bool = True, forced: bool = True) -> np.ndarray:
        return self._parts(r, free, forced, "d")

    def profile(self, grid: RadialGrid | None = None, free: bool = True, forced: bool = True) -> RadialProfile:
        grid = grid or default_grid(self.geometry)
        return RadialProfile(self.geometry, grid, self.velocity(grid.r, free, forced), "velocity")

    def vorticity_profile(
        self, grid: RadialGrid | None = None, free: bool = True, forced: bool = True
    ) -> RadialProfile:
        grid = grid or default_grid(self.geometry)
        return RadialProfile(self.geometry, grid, self.vorticity(grid.r, free, forced), "scalar")

    def forced_field(self) -> SpectralField:
        return SpectralField(self.basis, self.forced_full.copy())

    def field(self) -> SpectralField:
        return SpectralField(self.basis, self.forced_full + self.w_free)

    def forced_sobolev(self, sigma: float, tail: bool = True) -> float:
        """``D_sigma`` norm of the forced part, with the high-mode tail added analytically."""
        return _norm_with_tail(self.basis, self.forced_full, self.harmonic_now, sigma, tail)

    def error_sobolev(self, sigma: float, tail: bool = True) -> float:
        """``D_sigma`` norm of ``u(t) - u0``."""
        if self.u0_coeffs is None:
            return self.forced_sobolev(sigma, tail)
        c = self.forced_full + self.w_free - self.u0_coeffs
        h0 = _harmonic_of(self.u0, self.geometry) if self.u0 is not None else ClosedSwirl()
        return _norm_with_tail(self.basis, c, self.harmonic_now - h0, sigma, tail)


def _harmonic_of(u0: RadialProfile, geometry: Geometry) -> ClosedSwirl:
    fields = forcing_fields(geometry)
    traces = _traces(u0, geometry)
    out = ClosedSwirl()
    for F, a in zip(fields, traces):
        out = out + F.field * a
    return out


def _traces(u0: RadialProfile, geometry: Geometry) -> list[float]:
    """Boundary angular velocities of a profile (outer first)."""
    a = [TWO_PI * float(u0(1.0))]
    if geometry.is_annulus:
        rho = geometry.rho
        a.append(TWO_PI * float(u0(rho)) / rho)
    return a


def _harmonic_coeffs(h: ClosedSwirl, basis: EigenBasis) -> np.ndarray:
    """Coefficients of a harmonic swirl ``beta1 f1 + beta2 f2``."""
    p = dict(h.powers)
    b1 = TWO_PI * p.get(1, 0.0)
    b2 = TWO_PI * h.inv
    return Forcing(h, h, None, b1, b2).coeffs(basis)


def _norm_with_tail(basis: EigenBasis, coeffs, harmonic: ClosedSwirl, sigma: float, tail: bool) -> float:
    lam = basis.eigenvalues
    head = float(np.sum(lam**sigma * coeffs**2))
    if not tail:
        return np.sqrt(head)
    return float(np.sqrt(head + harmonic_tail(basis, harmonic, sigma)))


def harmonic_tail(basis: EigenBasis, harmonic: ClosedSwirl, sigma: float) -> float:
    """``sum_{k > K} lambda_k^sigma h_k^2`` for a harmonic swirl ``h`` beyond the basis.

    Exact for ``sigma = 0`` (norm minus the retained coefficients).  Otherwise
    the disk uses ``h_k^2 = beta^2 / (pi j_k^2)`` with ``j_k ~ pi (k + 1/4)``
    (a Hurwitz zeta sum), and the annulus continues the observed decay
    ``k^(2 sigma - 2)`` of the last retained modes.
    """
    if sigma >= 0.5:
        raise ValueError("fields with a boundary trace need sigma < 1/2")
    lam = basis.eigenvalues
    hc = _harmonic_coeffs(harmonic, basis)
    if sigma == 0.0:
        extra = harmonic.norm_sq(basis.geometry) - float(np.sum(hc**2))
    elif not basis.geometry.is_annulus:
        beta = TWO_PI * dict(harmonic.powers).get(1, 0.0)
        s = 2.0 - 2.0 * sigma
        extra = beta**2 / np.pi * np.pi ** (-s) * special.zeta(s, basis.K + 1.25)
    else:
        m = min(32, basis.K // 4)
        k = np.arange(basis.K - m + 1, basis.K + 1)
        amp = np.mean((lam[-m:] ** sigma * hc[-m:] ** 2) * k ** (2.0 - 2.0 * sigma))
        extra = amp * special.zeta(2.0 - 2.0 * sigma, basis.K + 1)
    return max(float(extra), 0.0)


def _exp_moments(alpha: DrivingMotion, mu: np.ndarray, t: float):
    """Jump sum ``sum J e^{-mu (t - t_i)}`` and ``I = int_0^t e^{-mu (t - s)} a(s) ds``."""
    J = np.zeros_like(mu)
    for s, size in alpha.jump_list(t):
        J += size * np.exp(-mu * (t - s))
    I = np.zeros_like(mu)
    if t > 0 and (alpha.variant == "smooth" or alpha.density is not None):
        s, w = density_rule(alpha, t, graded=True)
        a = alpha.rate(s)
        x = t - s
        step = max(1, int(4e6 // s.size))
        for i in range(0, mu.size, step):
            I[i : i + step] = np.exp(-np.multiply.outer(mu[i : i + step], x)) @ (w * a)
    return J, I


def _has_density(alpha: DrivingMotion) -> bool:
    return alpha.variant == "smooth" or alpha.density is not None


def _tau_min(bc: SwirlBoundaryData, t: float, with_u0: bool) -> float:
    taus = [t] if with_u0 else []
    for a in bc.alphas:
        if a.is_measure:
            taus += [t - s for s, _ in a.jump_list(t) if t - s > 0]
            if _has_density(a):
                taus.append(t)
        else:
            taus.append(t)
    return min(taus) if taus else t


def solve_flow(
    u0: RadialProfile | None,
    bc: SwirlBoundaryData,
    nu: float,
    t: float,
    basis: EigenBasis | None = None,
    *,
    form: str = "stieltjes",
    K: int | None = None,
) -> SwirlSolution:
    """Solve the driven swirl problem at one time.

    Parameters
    ----------
    u0 : RadialProfile or None
        Initial tangential speed (``None`` for rest).
    bc : SwirlBoundaryData
        Boundary motions.
    nu, t : float
        Viscosity and time.
    basis : EigenBasis, optional
        Dirichlet swirl basis; chosen adaptively when omitted.
    form : {"stieltjes", "lp"}
        ``stieltjes`` integrates ``(I - e^{nu (t-s) A}) F`` against ``d alpha``
        and needs a smooth or bv motion.  ``lp`` uses the integrated-by-parts
        form ``-nu int A e^{nu (t-s) A} F alpha(s) ds`` and accepts any
        motion; its synthesis is purely modal.
    """
    geometry = bc.geometry
    if u0 is not None and u0.geometry != geometry:
        raise ValueError("initial profile and boundary data live on different geometries")
    if nu <= 0 or t < 0:
        raise ValueError("need nu > 0 and t >= 0")
    if form not in ("stieltjes", "lp"):
        raise ValueError(f"unknown integral form {form!r}")
    if form == "stieltjes":
        for a in bc.alphas:
            if not a.is_measure:
                raise ValueError(f"the Stieltjes form needs smooth or bv motions, got {a.variant}")
    if basis is None:
        if K is None:
            K = choose_modes(geometry, nu, _tau_min(bc, t, u0 is not None) if t > 0 else np.inf)
        basis = basis_for(geometry, K)
    elif basis.geometry != geometry or basis.is_neumann:
        raise ValueError("basis must be a Dirichlet swirl basis on the problem geometry")
    mu = nu * basis.eigenvalues
    fields = forcing_fields(geometry)

    closed = ClosedSwirl()
    harmonic_now = ClosedSwirl()
    w_forced = np.zeros(basis.size)
    full = np.zeros(basis.size)
    for F, alpha in zip(fields, bc.alphas):
        c = F.coeffs(basis)
        if form == "lp":
            if t > 0:
                g = lambda x, mu=mu: mu * np.exp(-np.multiply.outer(x, mu))  # noqa: E731
                Sk = c * lp_integrate(g, alpha, t, delta=0.1, vectorized=True, lag=True)
                full += Sk
                w_forced += Sk
                harmonic_now = harmonic_now + F.field * float(alpha(t))
            continue
        at = float(alpha(t))
        J, I = _exp_moments(alpha, mu, t)
        full += c * (at - J - I)
        harmonic_now = harmonic_now + F.field * at
        closed = closed + F.field * at
        rem = J + I
        if _has_density(alpha) and t > 0:
            a_t = float(alpha.rate(np.array([t]))[0])
            closed = closed - F.z1 * (a_t / nu)
            rem = rem - a_t / mu
            if F.z2 is not None:
                ap_t = float(alpha.rate_prime(np.array([t]))[0])
                closed = closed + F.z2 * (ap_t / nu**2)
                rem = rem + ap_t / mu**2
        w_forced += -c * rem

    w_free = np.zeros(basis.size)
    u0_coeffs = None
    if u0 is not None:
        traces = _traces(u0, geometry)
        harm0 = ClosedSwirl()
        for F, a in zip(fields, traces):
            harm0 = harm0 + F.field * a
        # only modes that survive the decay need the projection of the zero-trace part
        k_free = choose_modes(geometry, nu, t, cap=basis.size) if t > 0 else basis.size
        k_free = min(k_free, basis.size)
        u00 = u0 - RadialProfile(geometry, u0.grid, harm0.velocity(u0.r), "velocity")
        proj = np.zeros(basis.size)
        proj[:k_free] = to_spectral(u00, basis.truncated(k_free)).coeffs
        u0_coeffs = proj + _harmonic_coeffs(harm0, basis)
        w_free = u0_coeffs * np.exp(-mu * t)
    return SwirlSolution(
        geometry, nu, t, basis, closed, w_forced, w_free, full, harmonic_now, u0, u0_coeffs, form
    )


def solve(
    u0: RadialProfile | None,
    bc: SwirlBoundaryData,
    nu: float,
    t: float,
    basis: EigenBasis | None = None,
    grid: RadialGrid | None = None,
    **kwargs,
) -> RadialProfile:
    """Tangential speed of the solution at time ``t`` on ``grid``."""
    return solve_flow(u0, bc, nu, t, basis, **kwargs).profile(grid)


SWEEP_COLUMNS = ("nu", "t", "norm_family", "sigma", "q", "value_err", "value_forced")


def _grid_norm(profile: RadialProfile, spec: NormSpec) -> float:
    if spec.family == "lebesgue":
        return lebesgue_norm(profile, spec.q)
    return gagliardo_seminorm(profile, spec.sigma, spec.q)


def sweep(
    u0: RadialProfile | None,
    bc: SwirlBoundaryData,
    nus: Sequence[float],
    ts: Sequence[float],
    norms: Iterable[NormSpec],
    grid: RadialGrid | None = None,
) -> list[dict]:
    """Norms of ``u(t) - u0`` and of the forced part over a ``(nu, t)`` grid.

    Rows are ordered by ``nu`` (as given), then ``t``, then norm.
    """
    norms = list(norms)
    if not nus or not ts or not norms:
        raise ValueError("nu-list, t-list and norm list must be nonempty")
    geometry = bc.geometry
    grid = grid or default_grid(geometry)
    rows = []
    for nu in nus:
        for t in ts:
            sol = solve_flow(u0, bc, nu, t)
            need_grid = any(n.family != "spectral-sobolev" for n in norms)
            if need_grid:
                full = sol.profile(grid)
                forced = sol.profile(grid, free=False)
                u0g = grid_values(u0, grid, geometry)
                err = full - u0g
            for spec in norms:
                if spec.family == "spectral-sobolev":
                    ve, vf = sol.error_sobolev(spec.sigma), sol.forced_sobolev(spec.sigma)
                else:
                    ve, vf = _grid_norm(err, spec), _grid_norm(forced, spec)
                rows.append(
                    dict(nu=nu, t=t, norm_family=spec.family, sigma=spec.sigma, q=spec.q, value_err=ve, value_forced=vf)
                )
    return rows


def grid_values(u0: RadialProfile | None, grid: RadialGrid, geometry: Geometry) -> np.ndarray:
    if u0 is None:
        return np.zeros(grid.size)
    if u0.grid is grid:
        return u0.values
    return u0(grid.r)


def write_sweep_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([row[c] if isinstance(row[c], str) else repr(float(row[c])) for c in SWEEP_COLUMNS])
