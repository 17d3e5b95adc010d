"""Heat semigroups on radial fields, fractional weights, and whole-plane heat flow."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .basis import bessel_zeros
from .field import RadialProfile, SpectralField

__all__ = [
    "EvolutionParams",
    "EmbeddingTooSmall",
    "heat_weights",
    "evolve",
    "fractional_apply",
    "whole_plane_evolve",
]


@dataclass(frozen=True)
class EvolutionParams:
    """Viscosity ``nu`` and time ``t``; only the product enters the kernels."""

    nu: float
    t: float

    def __post_init__(self):
        for name in ("nu", "t"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")

    @property
    def nut(self) -> float:
        return self.nu * self.t


class EmbeddingTooSmall(ValueError):
    """The embedding disk is too small for the requested diffusion time."""


def heat_weights(sqrt_lam: np.ndarray, nut: float) -> np.ndarray:
    return np.exp(-nut * sqrt_lam**2)


def evolve(field: SpectralField, params: EvolutionParams) -> SpectralField:
    """Apply ``exp(nu t A)`` mode-wise; the Neumann constant mode is left unchanged."""
    return SpectralField(field.basis, field.coeffs * heat_weights(field.basis.sqrt_lam, params.nut))


def fractional_apply(field: SpectralField, gamma: float, params: EvolutionParams) -> SpectralField:
    """Apply ``(-nu t A)^gamma exp(nu t A)``, i.e. weights ``x^gamma e^{-x}`` with ``x = nu t lambda_k``."""
    if not (0.0 <= gamma <= 2.0):
        raise ValueError("gamma must lie in [0, 2]")
    x = params.nut * field.basis.eigenvalues
    if gamma == 0.0:
        return evolve(field, params)
    if params.nut == 0.0:
        raise ValueError("gamma > 0 requires nu t > 0")
    return SpectralField(field.basis, field.coeffs * x**gamma * np.exp(-x))


def whole_plane_evolve(
    u0: RadialProfile,
    params: EvolutionParams,
    R: float = 4.0,
    tol: float = 1e-8,
    max_modes: int = 40000,
) -> RadialProfile:
    """Whole-plane heat flow of a disk swirl profile extended by constant angular velocity.

    Beyond ``r = 1`` the field continues as the rigid rotation ``s(1) x^perp``,
    which is harmonic and hence invariant under the flow.  Only the compactly
    supported difference ``v(r) - v(1) r`` is evolved, in the Dirichlet basis
    of the disk of radius ``R``.  The wall at ``R`` perturbs the unit disk by
    at most ``exp(-(R-1)^2 / (4 nu t))``.
    """
    if u0.geometry.is_annulus:
        raise ValueError("whole-plane evolution starts from a disk profile")
    if R < 4.0:
        raise ValueError("embedding radius must be >= 4")
    nut = params.nut
    if nut == 0.0:
        return u0
    bound = np.exp(-((R - 1.0) ** 2) / (4.0 * nut))
    if bound > tol:
        raise EmbeddingTooSmall(f"embedding too small: wall influence {bound:.2e} > {tol:.0e}")
    v1 = float(u0(1.0))
    # enough modes that exp(-nut lambda_K) < 1e-17
    kappa_max = R * np.sqrt(40.0 / nut)
    K = int(min(max_modes, max(64, np.ceil(kappa_max / np.pi) + 8)))
    j = bessel_zeros(1, K)
    kap = j / R
    norms = 1.0 / (R * np.sqrt(np.pi) * special.jv(0, j))
    n_q = int(kap[-1] / np.pi * 2) + 512
    x, w = np.polynomial.legendre.leggauss(n_q)
    rq = 0.5 * (x + 1.0)
    wq = 0.5 * w
    wfun = u0(rq) - v1 * rq
    coeffs = np.zeros(K)
    step = max(1, int(2e7 // n_q))
    for s in range(0, K, step):
        sl = slice(s, s + step)
        M = special.jv(1, np.multiply.outer(rq, kap[sl])) * norms[sl]
        coeffs[sl] = M.T @ (wfun * wq * 2.0 * np.pi * rq)
    coeffs *= np.exp(-nut * kap**2)
    r = u0.r
    out = v1 * r
    step = max(1, int(2e7 // r.size))
    for s in range(0, K, step):
        sl = slice(s, s + step)
        out = out + (special.jv(1, np.multiply.outer(r, kap[sl])) * norms[sl]) @ coeffs[sl]
    return u0.with_values(out)
