"""Dense reference solution for the linear toy problem.

With ``beta(r) = r`` and ``pi = 0`` the regularized system is affine,
``U' = M U + b``, so it is solved exactly by the matrix exponential of the
augmented matrix ``[[M, b], [0, 0]]``. Every operator is assembled here as a
dense matrix with ``numpy.linalg``; nothing is shared with the tridiagonal
solvers of :mod:`grid`, which keeps this an independent check.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .system import InitialData, Params

__all__ = ["dense_neg_laplacian", "dense_yosida", "toy_matrix", "toy_solution"]


def dense_neg_laplacian(n: int, length: float = 1.0) -> np.ndarray:
    dx = length / n
    A = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    A[0, 0] = A[-1, -1] = 1.0
    return A / dx**2


def dense_yosida(n: int, lam: float, length: float = 1.0) -> np.ndarray:
    I = np.eye(n)
    J = np.linalg.inv(I + lam * dense_neg_laplacian(n, length))
    return (I - J) / lam


def toy_matrix(n: int, params: Params, data: InitialData, length: float = 1.0):
    """``(M, b)`` of the affine toy system in the ordering ``(theta, phi, w)``.

    The source must be time independent.
    """
    if not data.forcing.is_static:
        raise ValueError("the dense toy needs a time-independent source")
    tau, eta, eps = params.tau, params.eta, params.eps
    I, Z = np.eye(n), np.zeros((n, n))
    Al = dense_yosida(n, params.lam, length)
    s = 1.0 / (1.0 + eps)  # Yosida approximation of the identity
    f = data.forcing(0.0)
    if tau > 0:
        # phi_t row, as a map of (theta, phi, w) plus a constant
        P = np.hstack([Z, -I / tau, -Al / tau])
        p0 = data.v0 + data.phi0 / tau
    else:
        # (I + eta A_lam) phi_t = -A_lam (A_lam phi + s phi - theta)
        S = np.linalg.solve(I + eta * Al, -Al)
        P = np.hstack([-S, S @ (Al + s * I), Z])
        p0 = np.zeros(n)
    G = np.hstack([-I, Al + s * I, Z])  # A_lam phi + s phi - theta
    mu = eta * P + G
    theta_t = -P + np.hstack([-Al, Z, Z])
    M = np.vstack([theta_t, P, mu])
    b = np.concatenate([f - p0, p0, eta * p0])
    return M, b


def toy_solution(n: int, params: Params, data: InitialData, times, length: float = 1.0):
    """Exact ``(theta, phi, w)`` at each of ``times``; shape ``(len(times), 3, n)``."""
    M, b = toy_matrix(n, params, data, length)
    N = M.shape[0]
    aug = np.zeros((N + 1, N + 1))
    aug[:N, :N] = M
    aug[:N, N] = b
    U0 = np.concatenate([data.theta0, data.phi0, np.zeros(n), [1.0]])
    out = np.array([(expm(t * aug) @ U0)[:N] for t in np.asarray(times, dtype=float)])
    return out.reshape(len(out), 3, n)
