"""The regularized inertial system as a first-order ODE for U = (theta, phi, w).

With ``A_lam`` the Yosida regularization of the Neumann Laplacian and
``beta_eps`` that of beta, the unknowns evolve by

    phi_t   = v0 + (phi0 - phi - A_lam w) / tau
    w_t     = mu = eta phi_t + A_lam phi + beta_eps(phi) + pi(phi) - theta
    theta_t = f_eps(t) - phi_t - A_lam theta

where ``w`` is the time integral of the chemical potential. For ``tau = 0``
the second relation degenerates to ``phi_t + A_lam mu = 0``, which is solved
for ``phi_t`` directly (see :meth:`System.limit_vector_field`).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data_prep import Forcing, mollify_dual, mollify_elliptic, mollify_forcing
from .grid import Grid
from .scalar_ops import (
    LipschitzPerturbation,
    ScalarMonotone,
    cubic,
    neg_linear,
    yosida_scalar,
)

__all__ = ["Params", "State", "InitialData", "System", "prepare_initial_data"]


@dataclass(frozen=True)
class Params:
    """Inertia ``tau``, viscosity ``eta``, and the two regularizations ``eps``, ``lam``."""

    tau: float = 0.5
    eta: float = 0.5
    eps: float = 0.1
    lam: float = 0.1
    beta: ScalarMonotone = field(default_factory=cubic)
    pi: LipschitzPerturbation = field(default_factory=neg_linear)

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")

    def replace(self, **changes) -> "Params":
        return dataclasses.replace(self, **changes)


@dataclass
class State:
    theta: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.stack([self.theta, self.phi, self.w])

    @classmethod
    def from_array(cls, U, t=0.0) -> "State":
        return cls(theta=U[0], phi=U[1], w=U[2], t=t)


@dataclass(frozen=True)
class InitialData:
    """Mollified data (theta0_eps, phi0_eps, v0_eps, f_eps).

    The raw profiles are kept when available so the data certificate and the
    energy bound can be evaluated against them.
    """

    theta0: np.ndarray
    phi0: np.ndarray
    v0: np.ndarray
    forcing: Forcing
    theta0_raw: Optional[np.ndarray] = None
    phi0_raw: Optional[np.ndarray] = None
    v0_raw: Optional[np.ndarray] = None

    @property
    def m_phi0(self) -> float:
        return float(np.mean(self.phi0))

    @property
    def m_v0(self) -> float:
        return float(np.mean(self.v0))

    def m0(self, tau: float) -> float:
        """Conserved combination ``tau m(v0) + m(phi0)``."""
        return tau * self.m_v0 + self.m_phi0


def prepare_initial_data(grid: Grid, eps: float, theta0, phi0, v0, forcing: Forcing) -> InitialData:
    """Mollify raw data with parameter ``eps``."""
    return InitialData(
        theta0=mollify_elliptic(grid, eps, theta0),
        phi0=mollify_elliptic(grid, eps, phi0),
        v0=mollify_dual(grid, eps, v0),
        forcing=mollify_forcing(grid, eps, forcing),
        theta0_raw=grid.check(theta0).copy(),
        phi0_raw=grid.check(phi0).copy(),
        v0_raw=grid.check(v0).copy(),
    )


class System:
    """Vector field of the regularized problem on a fixed grid."""

    def __init__(self, grid: Grid, params: Params, data: InitialData):
        self.grid = grid
        self.params = params
        self.data = data
        for name in ("theta0", "phi0", "v0"):
            grid.check(getattr(data, name))

    def initial_state(self) -> State:
        d = self.data
        return State(theta=d.theta0.copy(), phi=d.phi0.copy(), w=np.zeros_like(d.phi0), t=0.0)

    def _bulk(self, phi):
        p = self.params
        return yosida_scalar(p.beta, p.eps, phi) + p.pi(phi)

    def _mu(self, theta, phi, phi_t, a_phi):
        return self.params.eta * phi_t + a_phi + self._bulk(phi) - theta

    def vector_field(self, s: State):
        """``(theta_t, phi_t, w_t)`` for ``tau > 0``."""
        p, d = self.params, self.data
        if p.tau <= 0:
            raise ValueError("vector_field needs tau > 0; use limit_vector_field for tau = 0")
        a_theta, a_phi, a_w = self.grid.yosida(p.lam, np.stack([s.theta, s.phi, s.w]))
        phi_t = (p.tau * d.v0 + d.phi0 - s.phi - a_w) / p.tau
        w_t = self._mu(s.theta, s.phi, phi_t, a_phi)
        theta_t = d.forcing(s.t) - phi_t - a_theta
        return theta_t, phi_t, w_t

    def recover_mu(self, s: State, phi_t) -> np.ndarray:
        """Chemical potential from the third equation, given ``phi_t``."""
        a_phi = self.grid.yosida(self.params.lam, s.phi)
        return self._mu(s.theta, s.phi, phi_t, a_phi)

    def limit_vector_field(self, theta, phi, t=0.0):
        """``(theta_t, phi_t)`` for ``tau = 0``.

        ``(I + eta A_lam) phi_t = -A_lam G`` with
        ``G = A_lam phi + beta_eps(phi) + pi(phi) - theta``. Because
        ``I + eta A_lam = (I + (lam + eta) A) J_lam``, the solution is
        ``phi_t = -A_{lam + eta} G``: one tridiagonal solve.
        """
        p = self.params
        a_theta, a_phi = self.grid.yosida(p.lam, np.stack([theta, phi]))
        g = a_phi + self._bulk(phi) - theta
        phi_t = -self.grid.yosida(p.lam + p.eta, g)
        theta_t = self.data.forcing(t) - phi_t - a_theta
        return theta_t, phi_t

    def rhs(self, t, U) -> np.ndarray:
        """Stacked time derivative used by the integrators; w is carried for tau = 0 too."""
        if self.params.tau > 0:
            return np.stack(self.vector_field(State(U[0], U[1], U[2], t)))
        theta_t, phi_t = self.limit_vector_field(U[0], U[1], t)
        mu = self.recover_mu(State(U[0], U[1], U[2], t), phi_t)
        return np.stack([theta_t, phi_t, mu])
