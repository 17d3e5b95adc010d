"""Monte-Carlo check of the Wiener-Ito variance identity for Brownian boundary motion.

With ``alpha`` a Wiener path, the forced flow is the Ito integral
``S(t) = int_0^t (I - e^{nu (t-s) A}) f1 d omega(s)`` whose integrand is
deterministic, so ``E ||S(t)||^2 = int_0^t ||(e^{nu s A} - I) f1||^2 ds``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .basis import DISK, EigenBasis, dirichlet_swirl_basis
from .driving import DrivingMotion
from .duhamel import F1_SWIRL, choose_modes, forcing_fields, harmonic_tail

RHS_MODES = 4096

__all__ = ["McReport", "ito_sample", "ito_norms", "variance_check", "rhs_closed", "rhs_quadrature", "write_mc_csv"]


@dataclass(frozen=True)
class McReport:
    nu: float
    t: float
    n_paths: int
    sample_mean: float
    std_error: float
    quadrature_rhs: float
    sigma: float = 0.0
    seed: int | tuple | None = None

    @property
    def z_score(self) -> float:
        return abs(self.sample_mean - self.quadrature_rhs) / self.std_error if self.std_error > 0 else np.inf


def _basis_for_step(nu: float, dt: float) -> EigenBasis:
    # beyond K every mode has forgotten all but a negligible part of the last increment
    return dirichlet_swirl_basis(choose_modes(DISK, nu, dt, floor=256, cap=20000))


def ito_norms(increments: np.ndarray, nu: float, dt: float, basis: EigenBasis, sigma: float = 0.0) -> np.ndarray:
    """Squared ``D_sigma`` norms of left-endpoint Ito sums for a batch of paths.

    ``increments`` has shape ``(n_steps, n_paths)``.  Mode ``k`` needs
    ``E_k = sum_i exp(-mu_k (t - s_i)) d omega_i``; modes are grouped by the
    number of recent increments that still carry weight above ``e^-40``, and
    each group is one matrix product over that window.
    """
    n, P = increments.shape
    t = n * dt
    c = forcing_fields(DISK)[0].coeffs(basis)
    lam = basis.eigenvalues
    mu = nu * lam
    omega_t = increments.sum(axis=0)
    lags = dt * np.arange(n, 0, -1)  # t - s_i for i = 0..n-1
    window = np.minimum(n, np.ceil(40.0 / (mu * dt)).astype(int) + 1)
    out = np.zeros(P)
    sizes = [n]
    while sizes[-1] > 1:
        sizes.append((sizes[-1] + 1) // 2)
    for w, below in zip(sizes, sizes[1:] + [0]):
        idx = np.nonzero((window <= w) & (window > below))[0]
        if idx.size == 0:
            continue
        M = np.exp(-np.multiply.outer(mu[idx], lags[n - w :]))
        E = M @ increments[n - w :]
        S = c[idx, None] * (omega_t[None, :] - E)
        out += np.sum((lam[idx] ** sigma)[:, None] * S**2, axis=0)
    out += harmonic_tail(basis, F1_SWIRL, sigma) * omega_t**2
    return out


def ito_sample(path: DrivingMotion, nu: float, t: float, basis: EigenBasis | None = None, sigma: float = 0.0) -> float:
    """Squared ``D_sigma`` norm of the discretized forced flow for one Brownian path."""
    if path.variant != "brownian":
        raise ValueError("ito_sample needs a brownian path")
    if path.horizon < t - 1e-12:
        raise ValueError("path horizon shorter than t")
    n = int(round(t / path.dt))
    if abs(n * path.dt - t) > 1e-9 * max(t, 1.0):
        raise ValueError("t must be a multiple of the path's dt")
    inc = np.diff(path.samples[: n + 1])[:, None]
    basis = basis or _basis_for_step(nu, path.dt)
    return float(ito_norms(inc, nu, path.dt, basis, sigma)[0])


def rhs_closed(nu: float, t: float, sigma: float = 0.0, basis: EigenBasis | None = None) -> float:
    """``sum_k lambda^sigma c_k^2 int_0^t (1 - e^{-mu_k s})^2 ds`` with per-mode closed forms."""
    basis = basis or dirichlet_swirl_basis(RHS_MODES)
    c = forcing_fields(DISK)[0].coeffs(basis)
    lam = basis.eigenvalues
    mu = nu * lam
    x = mu * t
    per = t - 2.0 * (-np.expm1(-x)) / mu + (-np.expm1(-2.0 * x)) / (2.0 * mu)
    return float(np.sum(lam**sigma * c**2 * per) + t * harmonic_tail(basis, F1_SWIRL, sigma))


def rhs_quadrature(nu: float, t: float, sigma: float = 0.0, basis: EigenBasis | None = None, panels: int = 64) -> float:
    """The same right side by Gauss quadrature in ``s`` of ``||(e^{nu s A} - I) f1||^2``.

    ``s = t u^4`` flattens the ``s^(1/2)`` behaviour near ``s = 0``.
    """
    basis = basis or dirichlet_swirl_basis(RHS_MODES)
    c = forcing_fields(DISK)[0].coeffs(basis)
    lam = basis.eigenvalues
    mu = nu * lam
    x, w = np.polynomial.legendre.leggauss(16)
    e = np.linspace(0.0, 1.0, panels + 1)
    u = (e[:-1, None] + (e[1:] - e[:-1])[:, None] * (x + 1) / 2).ravel()
    wu = ((e[1:] - e[:-1])[:, None] / 2 * w).ravel()
    s = t * u**4
    ws = wu * 4.0 * t * u**3
    tail = harmonic_tail(basis, F1_SWIRL, sigma)
    total = 0.0
    weight = lam**sigma * c**2
    for si, wi in zip(s, ws):
        total += wi * (np.sum(weight * np.expm1(-mu * si) ** 2) + tail)
    return float(total)


def variance_check(
    nu: float,
    t: float,
    n_paths: int = 10000,
    seed: int | tuple = 0,
    sigma: float = 0.0,
    n_steps: int = 2048,
    batch: int = 1000,
) -> McReport:
    """Compare the Monte-Carlo mean of ``||S(t)||^2`` with the deterministic right side.

    Path ``i`` draws its increments from ``SeedSequence(seed).spawn(n_paths)[i]``
    so results do not depend on batching or scheduling.  ``seed`` may be a
    tuple of integers, e.g. ``(master, cell)`` for independent runs.
    """
    if n_paths < 100:
        raise ValueError("n_paths must be >= 100")
    dt = t / n_steps
    basis = _basis_for_step(nu, dt)
    children = np.random.SeedSequence(seed).spawn(n_paths)
    vals = np.empty(n_paths)
    for b0 in range(0, n_paths, batch):
        kids = children[b0 : b0 + batch]
        inc = np.empty((n_steps, len(kids)))
        for j, ss in enumerate(kids):
            inc[:, j] = np.random.default_rng(ss).normal(0.0, np.sqrt(dt), n_steps)
        vals[b0 : b0 + len(kids)] = ito_norms(inc, nu, dt, basis, sigma)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n_paths))
    return McReport(nu, t, n_paths, mean, se, rhs_closed(nu, t, sigma), sigma, seed)


def write_mc_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "t", "n_paths", "sample_mean", "std_error", "rhs"])
        for r in reports:
            w.writerow([repr(r.nu), repr(r.t), r.n_paths, repr(r.sample_mean), repr(r.std_error), repr(r.quadrature_rhs)])
