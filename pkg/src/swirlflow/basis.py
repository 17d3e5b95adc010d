"""Bessel eigenbases for the radial reductions of the disk and annulus Laplacians.

Swirl fields ``u = s(|x|) x^perp`` are described by their tangential speed
``v(r) = r s(r)``.  The vector Laplacian with zero Dirichlet data acts on ``v``
as the order-one Bessel operator, so its eigenfunctions are ``J1(k r)`` on the
disk and the cross products ``J1(k r) Y1(k rho) - Y1(k r) J1(k rho)`` on the
annulus.  The scalar Neumann Laplacian governing the vorticity shares the same
nonzero spectrum (its eigenfunctions are the order-zero partners) plus the
constant mode.

All modes are normalized in the planar sense, ``int phi_k^2 2 pi r dr = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "Geometry",
    "EigenBasis",
    "DISK",
    "annulus",
    "bessel",
    "bessel_zeros",
    "dirichlet_swirl_basis",
    "neumann_scalar_basis",
    "annulus_swirl_basis",
    "basis_for",
    "eval_mode",
]


@dataclass(frozen=True)
class Geometry:
    """Disk ``{|x| < 1}`` or annulus ``{rho < |x| < 1}``."""

    kind: str = "disk"
    inner_radius: float | None = None

    def __post_init__(self):
        if self.kind == "disk":
            if self.inner_radius is not None:
                raise ValueError("a disk has no inner radius")
        elif self.kind == "annulus":
            rho = self.inner_radius
            if rho is None or not (0.0 < rho < 1.0):
                raise ValueError(f"annulus inner radius must lie in (0, 1), got {rho!r}")
        else:
            raise ValueError(f"unknown geometry kind {self.kind!r}")

    @property
    def rmin(self) -> float:
        return 0.0 if self.kind == "disk" else float(self.inner_radius)

    @property
    def rho(self) -> float:
        return self.rmin

    @property
    def is_annulus(self) -> bool:
        return self.kind == "annulus"

    @property
    def area(self) -> float:
        return np.pi * (1.0 - self.rmin**2)

    def __str__(self):
        return "disk" if self.kind == "disk" else f"annulus(rho={self.inner_radius:g})"


DISK = Geometry("disk")


def annulus(rho: float) -> Geometry:
    return Geometry("annulus", float(rho))


def bessel(order: int, x):
    """Bessel function of the first kind ``J_order(x)`` for ``order`` in {0, 1, 2}.

    Thin wrapper over the Cephes implementation in :mod:`scipy.special` that
    enforces the domain used throughout the package.
    """
    if order not in (0, 1, 2):
        raise ValueError("only orders 0, 1 and 2 are supported")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("bessel argument must be finite")
    if np.any(x < 0):
        raise ValueError("bessel argument must be nonnegative")
    out = special.jv(order, x)
    return out if out.ndim else float(out)


def _mcmahon(order: int, k: np.ndarray) -> np.ndarray:
    # McMahon expansion of the k-th positive zero of J_order
    mu = 4.0 * order**2
    beta = (k + 0.5 * order - 0.25) * np.pi
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1) / b8
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8**3)
        - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * b8**5)
    )


def bessel_zeros(order: int, count: int, tol: float = 1e-14) -> np.ndarray:
    """First ``count`` positive zeros of ``J_order`` (order 0 or 1).

    McMahon guesses are polished by Newton's method; any iterate that leaves its
    bracketing interval ``[guess - 1, guess + 1]`` is replaced by a bisection
    step, so the iteration cannot jump to a neighbouring zero.
    """
    if order not in (0, 1):
        raise ValueError("zeros are provided for orders 0 and 1 only")
    if count < 1:
        raise ValueError("count must be >= 1")
    k = np.arange(1, count + 1, dtype=float)
    x = _mcmahon(order, k)
    lo, hi = x - 1.0, x + 1.0
    flo = special.jv(order, lo)
    if np.any(np.sign(flo) == np.sign(special.jv(order, hi))):
        raise RuntimeError("McMahon bracket failed to straddle a zero")
    for _ in range(100):
        f = special.jv(order, x)
        # d/dx J0 = -J1 ; d/dx J1 = J0 - J1/x
        df = -special.jv(1, x) if order == 0 else special.jv(0, x) - f / x
        same = np.sign(f) == np.sign(flo)
        lo = np.where(same, x, lo)
        flo = np.where(same, f, flo)
        hi = np.where(same, hi, x)
        step = f / df
        xn = x - step
        outside = (xn <= lo) | (xn >= hi) | ~np.isfinite(xn)
        xn = np.where(outside, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * np.maximum(1.0, np.abs(x))
        x = xn
        if np.all(done):
            break
    return x


_J = {0: special.j0, 1: special.j1}
_Y = {0: special.y0, 1: special.y1}


def _jn(order: int, x):
    # the fixed-order routines are several times faster than jv
    f = _J.get(order)
    return f(x) if f is not None else special.jv(order, x)


def _yn(order: int, x):
    f = _Y.get(order)
    return f(x) if f is not None else special.yv(order, x)


def _cyl(order: int, x, rho_kappa_J1, rho_kappa_Y1):
    """Cross-product cylinder function ``J_n(x) Y1(k rho) - Y_n(x) J1(k rho)``."""
    return _jn(order, x) * rho_kappa_Y1 - _yn(order, x) * rho_kappa_J1


def _annulus_roots(rho: float, count: int, tol: float = 1e-12) -> np.ndarray:
    step = np.pi * (1.0 - rho) / 8.0

    def det(k):
        return special.jv(1, k) * special.yv(1, k * rho) - special.yv(1, k) * special.jv(1, k * rho)

    kmax = (count + 2) * np.pi / (1.0 - rho) + 10.0
    while True:
        grid = np.arange(step * 0.5, kmax + step, step)
        vals = det(grid)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        if idx.size >= count:
            break
        kmax *= 1.5
    idx = idx[:count]
    lo, hi = grid[idx], grid[idx + 1]
    flo = vals[idx]
    # relative tolerance: at large k the absolute spacing of doubles exceeds 1e-12
    for _ in range(200):
        if np.all(hi - lo <= tol * np.maximum(1.0, hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = det(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigenvalues and normalization data of a radial operator.

    ``sqrt_lam`` holds the square roots of the eigenvalues in increasing order.
    For ``condition == "neumann-scalar"`` the first entry is the constant mode
    (eigenvalue zero) and mode indices start at 0; otherwise they start at 1.
    ``norms[i]`` multiplies the raw radial function of mode ``i``.
    """

    geometry: Geometry
    condition: str
    sqrt_lam: np.ndarray
    norms: np.ndarray
    # J1(k rho), Y1(k rho) per mode, annulus only
    _inner: tuple = field(default=(), repr=False)

    @property
    def K(self) -> int:
        return int(np.count_nonzero(self.sqrt_lam))

    @property
    def size(self) -> int:
        return self.sqrt_lam.size

    @property
    def first_index(self) -> int:
        return 0 if self.condition == "neumann-scalar" else 1

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.sqrt_lam**2

    @property
    def is_neumann(self) -> bool:
        return self.condition == "neumann-scalar"

    def _radial(self, order: int, r: np.ndarray, kappa: np.ndarray, sl=slice(None)) -> np.ndarray:
        x = np.multiply.outer(r, kappa)
        if self.geometry.is_annulus:
            j1, y1 = self._inner
            return _cyl(order, x, j1[sl], y1[sl])
        return _jn(order, x)

    def matrix(self, r, derivative: bool = False) -> np.ndarray:
        """Values (or radial derivatives) of every mode at radii ``r``; shape ``(len(r), size)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        kappa = self.sqrt_lam
        if self.is_neumann:
            k = kappa[1:]
            sl = slice(1, None)
            if derivative:
                body = -k * self._radial(1, r, k, sl)
                const = np.zeros((r.size, 1))
            else:
                body = self._radial(0, r, k, sl)
                const = np.ones((r.size, 1))
            return np.hstack([const, body]) * self.norms
        if derivative:
            z0 = self._radial(0, r, kappa)
            z1 = self._radial(1, r, kappa)
            with np.errstate(divide="ignore", invalid="ignore"):
                d = kappa * z0 - np.where(r[:, None] > 0, z1 / r[:, None], 0.5 * kappa)
            return d * self.norms
        return self._radial(1, r, kappa) * self.norms

    def curl_matrix(self, r) -> np.ndarray:
        """Vorticity ``v' + v/r`` of each swirl mode, i.e. ``kappa_k`` times the order-zero partner."""
        if self.is_neumann:
            raise ValueError("curl is defined for swirl (velocity) bases")
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return self._radial(0, r, self.sqrt_lam) * (self.sqrt_lam * self.norms)

    def neumann_partner(self) -> "EigenBasis":
        """Scalar Neumann basis whose mode ``k`` is ``curl(phi_k) / kappa_k``."""
        if self.is_neumann:
            return self
        rmin = self.geometry.rmin
        c0 = 1.0 / np.sqrt(np.pi * (1.0 - rmin**2))
        inner = ()
        if self.geometry.is_annulus:
            j1, y1 = self._inner
            inner = (np.concatenate([[0.0], j1]), np.concatenate([[0.0], y1]))
        return EigenBasis(
            self.geometry,
            "neumann-scalar",
            np.concatenate([[0.0], self.sqrt_lam]),
            np.concatenate([[c0], self.norms]),
            inner,
        )

    def truncated(self, K: int) -> "EigenBasis":
        n = K + (1 if self.is_neumann else 0)
        if n > self.size:
            raise ValueError("cannot extend a basis by truncation")
        inner = tuple(a[:n] for a in self._inner)
        return EigenBasis(self.geometry, self.condition, self.sqrt_lam[:n], self.norms[:n], inner)


@lru_cache(maxsize=32)
def dirichlet_swirl_basis(K: int) -> EigenBasis:
    """Disk Dirichlet swirl basis: ``phi_k = J1(j_k r) / (sqrt(pi) J0(j_k))``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    j = bessel_zeros(1, K)
    norms = 1.0 / (np.sqrt(np.pi) * special.jv(0, j))
    return EigenBasis(DISK, "dirichlet-swirl", j, norms)


@lru_cache(maxsize=32)
def _annulus_basis(rho: float, K: int) -> EigenBasis:
    kappa = _annulus_roots(rho, K)
    j1, y1 = special.jv(1, kappa * rho), special.yv(1, kappa * rho)
    z0_out = _cyl(0, kappa, j1, y1)
    z0_in = _cyl(0, kappa * rho, j1, y1)
    norms = 1.0 / np.sqrt(np.pi * (z0_out**2 - rho**2 * z0_in**2))
    # fix the sign so that modes behave like the disk modes near r = 1
    norms = norms * np.sign(z0_out)
    return EigenBasis(annulus(rho), "annulus-dirichlet-swirl", kappa, norms, (j1, y1))


def annulus_swirl_basis(rho: float, K: int) -> EigenBasis:
    """Annulus Dirichlet swirl basis built from the order-one cross products."""
    if not (0.0 < rho < 1.0):
        raise ValueError(f"inner radius must lie in (0, 1), got {rho!r}")
    if K < 1:
        raise ValueError("K must be >= 1")
    return _annulus_basis(float(rho), int(K))


def neumann_scalar_basis(K: int, geometry: Geometry = DISK) -> EigenBasis:
    """Scalar Neumann basis: the constant mode plus ``K`` order-zero modes."""
    return basis_for(geometry, K).neumann_partner()


def basis_for(geometry: Geometry, K: int) -> EigenBasis:
    """Dirichlet swirl basis on ``geometry`` with ``K`` modes."""
    if geometry.is_annulus:
        return annulus_swirl_basis(geometry.rho, K)
    return dirichlet_swirl_basis(K)


def eval_mode(basis: EigenBasis, k: int, r) -> np.ndarray | float:
    """Pointwise value of normalized mode ``k`` (1-based; 0 is the Neumann constant)."""
    idx = k - basis.first_index
    if not (0 <= idx < basis.size):
        raise IndexError(f"mode index {k} out of range for this basis")
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    rmin = basis.geometry.rmin
    if np.any(r_arr < rmin - 1e-14) or np.any(r_arr > 1.0 + 1e-14):
        raise ValueError("radius outside the geometry's radial interval")
    sub = EigenBasis(
        basis.geometry,
        basis.condition,
        basis.sqrt_lam[idx : idx + 1],
        basis.norms[idx : idx + 1],
        tuple(a[idx : idx + 1] for a in basis._inner),
    )
    if basis.is_neumann and idx == 0:
        vals = np.full(r_arr.shape, basis.norms[0])
    elif basis.is_neumann:
        vals = sub._radial(0, r_arr, sub.sqrt_lam)[:, 0] * sub.norms[0]
    else:
        vals = sub.matrix(r_arr)[:, 0]
    return vals if np.ndim(r) else float(vals[0])
