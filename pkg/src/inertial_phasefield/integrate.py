"""Fixed-step time integration of the regularized system."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import NoConvergence, newton_krylov

from .grid import Grid
from .scalar_ops import SolverFailure
from .system import Params, System

__all__ = [
    "StepRejected",
    "PicardFailure",
    "IntegrationFailure",
    "Trajectory",
    "SCHEMES",
    "LIPSCHITZ_FACTOR",
    "RK4_STABILITY",
    "lipschitz_estimate",
    "step_rk4",
    "step_picard_midpoint",
    "step_newton_midpoint",
    "integrate",
]

log = logging.getLogger(__name__)

# Frobenius norm of the 3x3 block matrix of component Lipschitz constants is
# below sqrt(24) * M, with M the largest scale below; 5 covers it.
LIPSCHITZ_FACTOR = 5.0
RK4_STABILITY = 2.5
SCHEMES = ("rk4", "picard_midpoint", "newton_midpoint")


class StepRejected(RuntimeError):
    def __init__(self, dt, bound):
        super().__init__(f"dt = {dt:.3e} exceeds the RK4 stability guard {bound:.3e}")
        self.dt = dt
        self.bound = bound


class PicardFailure(RuntimeError):
    def __init__(self, history):
        super().__init__(
            f"Picard iteration did not converge (last residual {history[-1]:.3e} after "
            f"{len(history)} iterations)"
        )
        self.history = list(history)


class IntegrationFailure(RuntimeError):
    """A step failed; ``partial`` holds the trajectory up to the last good step."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def lipschitz_estimate(p: Params) -> float:
    """Upper bound K for the Lipschitz constant of the vector field on H^3.

    For ``tau > 0``: ``K = 5 max(1/lam, 1/eps, 1/tau, 1/(tau lam), eta/(tau lam), L_pi, 1)``.
    For ``tau = 0`` the reduced field costs one more factor of the same scale:
    ``K = 16 M^2`` with ``M = max(1/lam, 1/eps, L_pi, 1)``.
    """
    lpi = p.pi.lipschitz_constant
    if p.tau > 0:
        scale = max(1 / p.lam, 1 / p.eps, 1 / p.tau, 1 / (p.tau * p.lam),
                    p.eta / (p.tau * p.lam), lpi, 1.0)
        return LIPSCHITZ_FACTOR * scale
    m = max(1 / p.lam, 1 / p.eps, lpi, 1.0)
    return 16.0 * m * m


def step_rk4(f: Callable, t: float, dt: float, U: np.ndarray, guard: Optional[float] = None):
    """Classical fourth-order Runge-Kutta step; ``guard`` is the largest admissible dt."""
    if guard is not None and dt > guard:
        raise StepRejected(dt, guard)
    k1 = f(t, U)
    k2 = f(t + dt / 2, U + dt / 2 * k1)
    k3 = f(t + dt / 2, U + dt / 2 * k2)
    k4 = f(t + dt, U + dt * k3)
    return U + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _picard(f, t, dt, U, X, tol, max_iter, omega, history):
    tm = t + dt / 2
    prev = np.inf
    for _ in range(max_iter):
        target = U + dt * f(tm, 0.5 * (U + X))
        X_new = X + omega * (target - X) if omega != 1.0 else target
        res = float(np.max(np.abs(X_new - X))) / max(1.0, float(np.max(np.abs(X_new))))
        history.append(res)
        X = X_new
        if res <= tol:
            return X
        if not np.isfinite(res) or (res > prev and res > 1e3 * tol and len(history) > 3):
            return None
        prev = res
    return None


def step_picard_midpoint(f: Callable, t: float, dt: float, U: np.ndarray, tol=1e-13,
                         max_iter=200, damping=(1.0, 0.5, 0.25, 0.125)):
    """Implicit midpoint ``X = U + dt f(t + dt/2, (U + X)/2)`` by fixed-point iteration.

    The iteration starts from an explicit Euler predictor. If it stalls or
    diverges it restarts with the next under-relaxation factor in ``damping``.
    The convergence test is on the update, relative to ``max(1, |X|_inf)``.

    Raises
    ------
    PicardFailure
        When every damping level fails; carries the residual history.
    """
    history = []
    predictor = U + dt * f(t, U)
    for omega in damping:
        X = _picard(f, t, dt, U, predictor.copy(), tol, max_iter, omega, history)
        if X is not None:
            return X
        log.debug("Picard stalled at t=%.6g with damping %.3g", t, omega)
    raise PicardFailure(history)


def step_newton_midpoint(f: Callable, t: float, dt: float, U: np.ndarray, tol=1e-12):
    """Implicit midpoint solved by Jacobian-free Newton-Krylov."""
    tm = t + dt / 2
    shape = U.shape

    def residual(x):
        X = x.reshape(shape)
        return (X - U - dt * f(tm, 0.5 * (U + X))).ravel()

    guess = (U + dt * f(t, U)).ravel()
    scale = max(1.0, float(np.max(np.abs(U))))
    try:
        x = newton_krylov(residual, guess, f_tol=tol * scale, maxiter=100)
    except NoConvergence as exc:
        r = float(np.max(np.abs(residual(np.asarray(exc.args[0])))))
        raise PicardFailure([r]) from exc
    return np.asarray(x).reshape(shape)


@dataclass
class Trajectory:
    """Saved states with the exact field derivative phi_t and mu at each sample."""

    t: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    phi_t: np.ndarray
    mu: np.ndarray
    params: Params
    grid: Grid
    dt: float
    scheme: str
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def n_cells(self) -> int:
        return self.phi.shape[-1]

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)


def _n_steps(T, dt):
    if T < 0 or not dt > 0:
        raise ValueError("need T >= 0 and dt > 0")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(T, dt):
        raise ValueError(f"T = {T} is not an integer multiple of dt = {dt}")
    return n


def integrate(system: System, T: float, dt: float, scheme="picard_midpoint", save_every=1,
              tol=1e-13, max_iter=200, newton_fallback=True, U0=None) -> Trajectory:
    """Integrate from the initial state (or ``U0``) to ``T`` with fixed steps.

    Raises
    ------
    IntegrationFailure
        With the partial trajectory attached, if a step cannot be completed.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    n = _n_steps(T, dt)
    p = system.params
    f = system.rhs
    K = lipschitz_estimate(p)
    guard = RK4_STABILITY / K if scheme == "rk4" else None
    if scheme == "picard_midpoint" and dt * K >= 1:
        log.info("dt*K = %.3g >= 1: Picard contraction not guaranteed, damping enabled", dt * K)

    U = system.initial_state().as_array() if U0 is None else np.array(U0, dtype=float)
    saved_t, saved_U, saved_dU = [], [], []
    stats = {"fallbacks": 0}

    def save(t, U):
        saved_t.append(t)
        saved_U.append(U.copy())
        saved_dU.append(f(t, U))

    def build():
        Us = np.array(saved_U)
        dUs = np.array(saved_dU)
        return Trajectory(t=np.array(saved_t), theta=Us[:, 0], phi=Us[:, 1], w=Us[:, 2],
                          phi_t=dUs[:, 1], mu=dUs[:, 2], params=p, grid=system.grid, dt=dt,
                          scheme=scheme,
                          stats=stats)

    save(0.0, U)
    for k in range(n):
        t = k * dt
        try:
            if scheme == "rk4":
                U = step_rk4(f, t, dt, U, guard)
            elif scheme == "newton_midpoint":
                U = step_newton_midpoint(f, t, dt, U, tol=max(tol, 1e-12))
            else:
                try:
                    U = step_picard_midpoint(f, t, dt, U, tol=tol, max_iter=max_iter)
                except PicardFailure:
                    if not newton_fallback:
                        raise
                    stats["fallbacks"] += 1
                    U = step_newton_midpoint(f, t, dt, U, tol=max(tol, 1e-12))
        except (StepRejected, PicardFailure, SolverFailure, FloatingPointError) as exc:
            raise IntegrationFailure(f"step {k} at t={t:.6g} failed: {exc}", build()) from exc
        if not np.all(np.isfinite(U)):
            raise IntegrationFailure(f"non-finite state after step {k}", build())
        if (k + 1) % save_every == 0 or k + 1 == n:
            save((k + 1) * dt, U)
    return build()
