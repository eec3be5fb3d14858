"""Runtime ledgers: mean-value laws, the summed energy identity, a priori
monitors and weak-form residuals, all evaluated on saved trajectories.

Time integrals use the trapezoid rule on the trajectory's own time grid.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .integrate import Trajectory
from .scalar_ops import moreau_scalar, yosida_scalar
from .system import InitialData

__all__ = [
    "MeanLawReport",
    "EnergyLedger",
    "AprioriMonitor",
    "WeakResidualReport",
    "UNIFORM_QUANTITIES",
    "mean_laws",
    "energy_ledger",
    "apriori_monitor",
    "weak_residual",
]


def _l2_time(t, values):
    if len(t) < 2:
        return 0.0
    return float(np.sqrt(trapezoid(np.asarray(values) ** 2, t)))


def _require_inertial(traj):
    if traj.params.tau <= 0:
        raise ValueError("this diagnostic needs a trajectory with tau > 0")


# -- mean-value laws -------------------------------------------------------------

@dataclass
class MeanLawReport:
    t: np.ndarray
    defect_phi: np.ndarray  # |m(phi) - exact exponential law|
    defect_phi_t: np.ndarray  # |m(phi_t) - m(v0) exp(-t/tau)|
    mean_yosida_w: np.ndarray  # |m(A_lam w)|, zero up to rounding
    dt: float

    @property
    def sup_defect(self) -> float:
        return float(max(self.defect_phi.max(), self.defect_phi_t.max()))

    def summary(self) -> dict:
        return {"dt": self.dt, "sup_defect": self.sup_defect,
                "sup_defect_phi": float(self.defect_phi.max()),
                "sup_defect_phi_t": float(self.defect_phi_t.max()),
                "sup_mean_yosida_w": float(self.mean_yosida_w.max())}


def mean_laws(traj: Trajectory, data: InitialData) -> MeanLawReport:
    """Compare trajectory means with the closed-form exponential laws."""
    _require_inertial(traj)
    tau = traj.params.tau
    decay = np.exp(-traj.t / tau)
    m0 = data.m0(tau)
    exact_phi = data.m_phi0 * decay + m0 * (1.0 - decay)
    exact_phi_t = data.m_v0 * decay
    a_w = traj.grid.yosida(traj.params.lam, traj.w)
    return MeanLawReport(
        t=traj.t.copy(),
        defect_phi=np.abs(traj.phi.mean(axis=1) - exact_phi),
        defect_phi_t=np.abs(traj.phi_t.mean(axis=1) - exact_phi_t),
        mean_yosida_w=np.abs(a_w.mean(axis=1)),
        dt=traj.dt,
    )


# -- energy identity ------------------------------------------------------------------

STORED_TERMS = ("theta", "inertia", "interface", "bulk", "lam_inertia", "viscous")
DISSIPATION_TERMS = ("grad_J_theta", "lam_A_theta", "dual_phi_t", "eta_phi_t", "lam_phi_t")
WORK_TERMS = ("forcing", "viscous_work", "eta_mean", "beta_mean", "pi_work", "theta_mean")


@dataclass
class EnergyLedger:
    """Per-sample terms of ``dE/dt + D = R`` and its time-integrated residual.

    ``residual[n] = E(t_n) - E(0) + int_0^{t_n} (D - R)``.
    """

    t: np.ndarray
    stored: dict
    dissipation: dict
    work: dict
    residual: np.ndarray = field(init=False)

    def __post_init__(self):
        energy = self.energy
        rate = self.total_dissipation - self.total_work
        integral = (cumulative_trapezoid(rate, self.t, initial=0.0)
                    if len(self.t) > 1 else np.zeros(1))
        self.residual = energy - energy[0] + integral

    @property
    def energy(self):
        return sum(self.stored.values())

    @property
    def total_dissipation(self):
        return sum(self.dissipation.values())

    @property
    def total_work(self):
        return sum(self.work.values())

    @property
    def final_residual(self) -> float:
        return float(abs(self.residual[-1]))

    @property
    def min_dissipation(self) -> float:
        return float(min(v.min() for v in self.dissipation.values()))

    def columns(self) -> dict:
        cols = {"t": self.t}
        cols.update({f"E_{k}": v for k, v in self.stored.items()})
        cols.update({f"D_{k}": v for k, v in self.dissipation.items()})
        cols.update({f"R_{k}": v for k, v in self.work.items()})
        cols["residual"] = self.residual
        return cols

    def summary(self) -> dict:
        return {"final_residual": self.final_residual,
                "max_residual": float(np.max(np.abs(self.residual))),
                "initial_energy": float(self.energy[0]),
                "min_dissipation": self.min_dissipation}


def energy_ledger(traj: Trajectory, data: InitialData) -> EnergyLedger:
    """Evaluate every term of the summed testing identity on each sample."""
    _require_inertial(traj)
    g = traj.grid
    p = traj.params
    tau, eta, lam, eps = p.tau, p.eta, p.lam, p.eps
    t = traj.t
    me = data.m_v0 * np.exp(-t / tau)
    z = traj.phi_t - me[:, None]
    dual_z = g.dual_norm(z) ** 2
    j_phi = g.resolvent(lam, traj.phi)
    a_phi = (traj.phi - j_phi) / lam
    j_theta = g.resolvent(lam, traj.theta)
    a_theta = (traj.theta - j_theta) / lam
    phi_t_sq = g.inner_h(traj.phi_t, traj.phi_t)
    def integral(u, axis=-1):
        return g.dx * np.sum(u, axis=axis)

    stored = {
        "theta": 0.5 * g.inner_h(traj.theta, traj.theta),
        "inertia": 0.5 * tau * dual_z,
        "interface": 0.5 * (g.grad_sq(j_phi) + lam * g.inner_h(a_phi, a_phi)),
        "bulk": integral(moreau_scalar(p.beta, eps, traj.phi), axis=1),
        "lam_inertia": 0.5 * lam * tau * phi_t_sq,
        "viscous": 0.5 * eta * g.inner_h(traj.phi, traj.phi),
    }
    dissipation = {
        "grad_J_theta": g.grad_sq(j_theta),
        "lam_A_theta": lam * g.inner_h(a_theta, a_theta),
        "dual_phi_t": dual_z,
        "eta_phi_t": eta * phi_t_sq,
        "lam_phi_t": lam * phi_t_sq,
    }
    forcing = np.array([data.forcing(tk) for tk in t])
    work = {
        "forcing": g.inner_h(forcing, traj.theta),
        "viscous_work": eta * g.inner_h(traj.phi_t, traj.phi),
        "eta_mean": eta * me * integral(traj.phi_t, axis=1),
        "beta_mean": me * integral(yosida_scalar(p.beta, eps, traj.phi), axis=1),
        "pi_work": -g.inner_h(p.pi(traj.phi), z),
        "theta_mean": -me * integral(traj.theta, axis=1),
    }
    return EnergyLedger(t=t.copy(), stored=stored, dissipation=dissipation, work=work)


# -- a priori monitors -----------------------------------------------------------------

UNIFORM_QUANTITIES = (
    "theta_Linf_H",
    "grad_theta_L2_H",
    "sqrt_eta_phi_t_L2_H",
    "sqrt_tau_phi_t_Linf_Vstar",
    "phi_t_L2_Vstar",
    "grad_phi_Linf_H",
    "bulk_Linf_L1",
)


@dataclass
class AprioriMonitor:
    """Norms bounded uniformly in the approximation parameters.

    V* norms use the ``||.||_*`` norm of the grid.
    """

    theta_Linf_H: float
    grad_theta_L2_H: float
    sqrt_eta_phi_t_L2_H: float
    sqrt_tau_phi_t_Linf_Vstar: float
    phi_t_L2_Vstar: float
    grad_phi_Linf_H: float
    bulk_Linf_L1: float
    mu_L2_Vstar: float
    w_Linf_V: float

    def as_dict(self) -> dict:
        return asdict(self)

    def uniform_entries(self) -> dict:
        return {k: getattr(self, k) for k in UNIFORM_QUANTITIES}


def apriori_monitor(traj: Trajectory) -> AprioriMonitor:
    g = traj.grid
    p = traj.params
    t = traj.t
    phi_t_h = g.norm_h(traj.phi_t)
    phi_t_star = g.dual_norm(traj.phi_t)
    bulk = g.dx * np.sum(np.abs(moreau_scalar(p.beta, p.eps, traj.phi)), axis=1)
    return AprioriMonitor(
        theta_Linf_H=float(g.norm_h(traj.theta).max()),
        grad_theta_L2_H=_l2_time(t, np.sqrt(g.grad_sq(traj.theta))),
        sqrt_eta_phi_t_L2_H=float(np.sqrt(p.eta)) * _l2_time(t, phi_t_h),
        sqrt_tau_phi_t_Linf_Vstar=float(np.sqrt(p.tau) * phi_t_star.max()),
        phi_t_L2_Vstar=_l2_time(t, phi_t_star),
        grad_phi_Linf_H=float(np.sqrt(g.grad_sq(traj.phi)).max()),
        bulk_Linf_L1=float(bulk.max()),
        mu_L2_Vstar=_l2_time(t, g.dual_norm(traj.mu)),
        w_Linf_V=float(g.norm_v(traj.w).max()),
    )


# -- weak-form residuals ------------------------------------------------------------------

@dataclass
class WeakResidualReport:
    """Dual norms of the three weak-form residuals at each sample.

    Time derivatives are second-order finite differences of the saved
    trajectory, so the residuals measure the time-discretization error.
    ``eq2_quadrature`` checks the time-integrated second equation with
    ``w`` rebuilt by trapezoid quadrature of the stored ``mu``.
    """

    t: np.ndarray
    eq1: np.ndarray
    eq2: np.ndarray
    eq3: np.ndarray
    eq2_quadrature: np.ndarray
    regularized: bool

    def summary(self) -> dict:
        return {"eq1": float(self.eq1.max()), "eq2": float(self.eq2.max()),
                "eq3": float(self.eq3.max()),
                "eq2_quadrature": float(self.eq2_quadrature.max()),
                "regularized": self.regularized}


def weak_residual(traj: Trajectory, data: InitialData, regularized=True) -> WeakResidualReport:
    """Residuals of the weak formulation along the trajectory.

    ``regularized=True`` uses the operators the trajectory actually solves
    (A_lam, beta_eps), so residuals vanish as the time step shrinks.
    ``regularized=False`` uses A and beta: the residual then also carries
    the lam- and eps-consistency error.
    """
    if len(traj.t) < 3:
        raise ValueError("weak_residual needs at least three saved samples")
    g = traj.grid
    p = traj.params
    t = traj.t
    d_theta = np.gradient(traj.theta, t, axis=0, edge_order=2)
    d_phi = np.gradient(traj.phi, t, axis=0, edge_order=2)
    d_w = np.gradient(traj.w, t, axis=0, edge_order=2)
    if regularized:
        op = lambda u: g.yosida(p.lam, u)  # noqa: E731
        bulk = yosida_scalar(p.beta, p.eps, traj.phi)
    else:
        op = g.neg_laplacian
        bulk = p.beta(traj.phi)
    forcing = np.array([data.forcing(tk) for tk in t])
    r1 = d_theta + d_phi + op(traj.theta) - forcing
    if p.tau > 0:
        r2 = p.tau * (d_phi - data.v0) + traj.phi - data.phi0 + op(traj.w)
    else:
        r2 = d_phi + op(d_w)
    r3 = p.eta * d_phi + op(traj.phi) + bulk + p.pi(traj.phi) - d_w - traj.theta

    w_quad = cumulative_trapezoid(traj.mu, t, axis=0, initial=0.0)
    rq = p.tau * (traj.phi_t - data.v0) + traj.phi - data.phi0 + g.yosida(p.lam, w_quad)
    return WeakResidualReport(t=t.copy(), eq1=g.dual_norm(r1), eq2=g.dual_norm(r2),
                              eq3=g.dual_norm(r3), eq2_quadrature=g.dual_norm(rq),
                              regularized=regularized)
