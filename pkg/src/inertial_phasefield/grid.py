"""Uniform cell-centered 1D mesh on (0, L) with homogeneous Neumann data.

Grid functions are plain float arrays whose last axis has length
``n_cells``; a leading axis stacks several fields (e.g. theta, phi, w) so the
resolvent can factor once and sweep all of them together.

The discrete Laplacian uses mirrored ghost cells, so its kernel is exactly
the constants and both row and column sums vanish; the mean is then
preserved by every resolvent ``(I + c A)^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

__all__ = ["Grid", "DomainError", "thomas_factor", "thomas_solve"]


class DomainError(ValueError):
    """Input outside the domain of an operator (e.g. nonzero mean for N)."""


def thomas_factor(diag, off):
    """Eliminate a symmetric tridiagonal matrix with constant off-diagonal.

    Returns ``(inv_denom, upper)`` so that :func:`thomas_solve` needs only two
    sweeps per right-hand side.
    """
    n = diag.shape[0]
    inv_denom = np.empty(n)
    upper = np.empty(n)
    d = diag[0]
    inv_denom[0] = 1.0 / d
    upper[0] = off * inv_denom[0]
    for i in range(1, n):
        d = diag[i] - off * upper[i - 1]
        inv_denom[i] = 1.0 / d
        upper[i] = off * inv_denom[i]
    return inv_denom, upper


@njit(cache=True)
def _thomas_sweeps(rhs, off, inv_denom, upper, out):
    k, n = rhs.shape
    for j in range(k):
        out[j, 0] = rhs[j, 0] * inv_denom[0]
        for i in range(1, n):
            out[j, i] = (rhs[j, i] - off * out[j, i - 1]) * inv_denom[i]
        for i in range(n - 2, -1, -1):
            out[j, i] -= upper[i] * out[j, i + 1]
    return out


def thomas_solve(factor, off, rhs):
    """Solve with a factorization from :func:`thomas_factor`; rhs is (n,) or (k, n)."""
    inv_denom, upper = factor
    b = np.ascontiguousarray(rhs, dtype=float)
    flat = b.reshape(-1, b.shape[-1])
    out = np.empty_like(flat)
    _thomas_sweeps(flat, float(off), inv_denom, upper, out)
    return out.reshape(b.shape)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh; all H, V and V* operations live here."""

    n_cells: int = 128
    length: float = 1.0
    _factors: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError("n_cells must be an integer >= 2")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1:] != (self.n_cells,):
            raise ValueError(
                f"geometry mismatch: expected last axis {self.n_cells}, got shape {u.shape}"
            )
        return u

    # -- spectral facts used by tests and oracles --------------------------

    def eigenvalue(self, k) -> float:
        """Eigenvalue of ``A`` for the cosine mode ``k`` (0 <= k < n)."""
        return 2.0 / self.dx**2 * (1.0 - np.cos(k * np.pi / self.n_cells))

    def cosine_mode(self, k) -> np.ndarray:
        return np.cos(k * np.pi * self.centers / self.length)

    # -- H and V structure --------------------------------------------------

    def mean(self, u):
        return self.check(u).mean(axis=-1)

    def inner_h(self, u, v):
        return self.dx * np.sum(self.check(u) * self.check(v), axis=-1)

    def norm_h(self, u):
        return np.sqrt(self.inner_h(u, u))

    def gradient(self, u):
        """Face differences ``(u[i+1] - u[i]) / dx`` on the n-1 interior faces."""
        return np.diff(self.check(u), axis=-1) / self.dx

    def grad_sq(self, u):
        """Squared H-norm of the discrete gradient, ``sum (du)^2 / dx``."""
        return np.sum(np.diff(self.check(u), axis=-1) ** 2, axis=-1) / self.dx

    def inner_grad(self, u, v):
        return np.sum(np.diff(self.check(u), axis=-1) * np.diff(self.check(v), axis=-1),
                      axis=-1) / self.dx

    def norm_v(self, u):
        return np.sqrt(self.grad_sq(u) + self.inner_h(u, u))

    # -- Neumann Laplacian and its resolvent family ------------------------

    def neg_laplacian(self, u):
        u = self.check(u)
        left = np.concatenate([u[..., :1], u[..., :-1]], axis=-1)
        right = np.concatenate([u[..., 1:], u[..., -1:]], axis=-1)
        return (2.0 * u - left - right) / self.dx**2

    def _factor(self, c):
        key = float(c)
        f = self._factors.get(key)
        if f is None:
            a = key / self.dx**2
            diag = np.full(self.n_cells, 1.0 + 2.0 * a)
            diag[0] = diag[-1] = 1.0 + a
            f = (thomas_factor(diag, -a), -a)
            self._factors[key] = f
        return f

    def solve_shifted(self, c, u):
        """``(I + c A)^{-1} u`` by a cached tridiagonal elimination (c >= 0)."""
        if not c >= 0:
            raise ValueError("shift coefficient must be nonnegative")
        u = self.check(u)
        if c == 0:
            return u.copy()
        factor, off = self._factor(c)
        return thomas_solve(factor, off, u)

    def resolvent(self, lam, u):
        """``J_lam u = (I + lam A)^{-1} u``."""
        if not lam > 0:
            raise ValueError("lambda must be positive")
        return self.solve_shifted(lam, u)

    def yosida(self, lam, u):
        """Yosida regularization ``(u - J_lam u) / lam`` of A; zero mean, 1/lam-Lipschitz."""
        u = self.check(u)
        return (u - self.resolvent(lam, u)) / lam

    # -- inverse Laplacian and dual norms ----------------------------------

    def inverse_neumann(self, psi, mean_tol=1e-10):
        """Zero-mean solution of ``A u = psi`` for zero-mean psi.

        Pins ``u[0] = 0``, integrates the face fluxes
        ``g[i+1/2] = -dx * sum_{j<=i} psi[j]`` and removes the mean.
        """
        psi = self.check(psi)
        scale = max(1.0, float(np.max(np.abs(psi)))) if psi.size else 1.0
        if np.any(np.abs(psi.mean(axis=-1)) > mean_tol * scale):
            raise DomainError("inverse_neumann needs a zero-mean argument")
        flux = -self.dx * np.cumsum(psi, axis=-1)[..., :-1]
        u = np.concatenate([np.zeros(psi.shape[:-1] + (1,)),
                            self.dx * np.cumsum(flux, axis=-1)], axis=-1)
        return u - u.mean(axis=-1, keepdims=True)

    def dual_norm(self, psi):
        """``||psi||_*`` with ``||psi||_*^2 = |grad N(psi - m)|^2 + m^2``."""
        psi = self.check(psi)
        m = psi.mean(axis=-1)
        z = psi - m[..., None]
        z = z - z.mean(axis=-1, keepdims=True)
        return np.sqrt(self.grad_sq(self.inverse_neumann(z)) + m**2)

    def riesz_inverse(self, psi):
        """Inverse duality map: ``(I + A)^{-1} psi``."""
        return self.solve_shifted(1.0, psi)

    def riesz_dual_norm(self, psi):
        """Standard V* norm ``<psi, F^{-1} psi>^{1/2}``."""
        return np.sqrt(self.inner_h(psi, self.riesz_inverse(psi)))
