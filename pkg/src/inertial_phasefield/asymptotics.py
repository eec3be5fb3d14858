"""Parameter sweeps and empirical convergence checks for the four limits
lambda -> 0, eps -> 0, eta -> 0 and tau -> 0.

Nothing here claims a rate: reports carry Cauchy differences between
consecutive sweep points, direct errors when a limit solver exists (tau = 0),
and observed orders labelled as empirical.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .data_prep import Forcing
from .grid import Grid
from .integrate import (
    RK4_STABILITY,
    IntegrationFailure,
    Trajectory,
    integrate,
    lipschitz_estimate,
)
from .system import Params, System, prepare_initial_data

__all__ = [
    "NORMS",
    "SWEEP_PARAMS",
    "Problem",
    "SweepSpec",
    "SweepResult",
    "ConvergenceReport",
    "auto_dt",
    "run_point",
    "sweep",
    "distance",
    "cauchy_rates",
    "limit_compare",
]

log = logging.getLogger(__name__)

NORMS = ("C0H", "L2Vstar", "LinfVstar")
SWEEP_PARAMS = {"lambda": "lam", "eps": "eps", "eta": "eta", "tau": "tau"}
# Midpoint fixed-point map contracts when dt * K / 2 < 1.
PICARD_CONTRACTION = 2.0
MAX_HALVINGS = 12


@dataclass(frozen=True)
class Problem:
    """Raw data and time grid shared by every point of a sweep.

    The data are mollified per point with that point's ``eps``.
    """

    grid: Grid
    theta0: np.ndarray
    phi0: np.ndarray
    v0: np.ndarray
    forcing: Forcing
    T: float = 1.0
    dt: float = 1e-3
    scheme: str = "picard_midpoint"
    tol: float = 1e-13

    def data(self, eps: float):
        return prepare_initial_data(self.grid, eps, self.theta0, self.phi0, self.v0, self.forcing)

    def system(self, params: Params) -> System:
        return System(self.grid, params, self.data(params.eps))


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    base: Params = field(default_factory=Params)
    norm: str = "C0H"

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.param!r}; "
                             f"choose from {sorted(SWEEP_PARAMS)}")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}; choose from {NORMS}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("a sweep needs at least one value")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly decreasing")
        positive = vals if self.param != "tau" else vals[:-1]
        if any(v <= 0 for v in positive) or vals[-1] < 0 or (self.param != "tau" and vals[-1] <= 0):
            raise ValueError("sweep values must be positive (tau may end at 0)")
        object.__setattr__(self, "values", vals)

    def params_at(self, value: float) -> Params:
        return self.base.replace(**{SWEEP_PARAMS[self.param]: value})


def auto_dt(params: Params, dt: float, scheme: str) -> tuple:
    """Halve ``dt`` until the scheme's stability or contraction bound holds.

    Returns ``(dt, halvings)``.
    """
    K = lipschitz_estimate(params)
    bound = RK4_STABILITY if scheme == "rk4" else PICARD_CONTRACTION
    k = 0
    while dt * K > bound and k < MAX_HALVINGS:
        dt /= 2
        k += 1
    return dt, k


def run_point(problem: Problem, params: Params) -> Trajectory:
    """Integrate one parameter point, saving on the problem's base time grid."""
    dt, k = auto_dt(params, problem.dt, problem.scheme)
    if k:
        log.info("dt reduced to %.3g for %s", dt, params)
    return integrate(problem.system(params), problem.T, dt, scheme=problem.scheme,
                     save_every=2**k, tol=problem.tol)


def _run_safe(args):
    problem, params = args
    try:
        return run_point(problem, params), None
    except IntegrationFailure as exc:
        return None, str(exc)


@dataclass
class SweepResult:
    spec: SweepSpec
    trajectories: list  # None where the point failed
    failures: dict  # value -> message

    @property
    def succeeded(self):
        vals = [v for v, tr in zip(self.spec.values, self.trajectories) if tr is not None]
        trs = [tr for tr in self.trajectories if tr is not None]
        return vals, trs


def sweep(spec: SweepSpec, problem: Problem, workers: int = 1) -> SweepResult:
    """Integrate every point of ``spec``; failed points are recorded, not raised."""
    jobs = [(problem, spec.params_at(v)) for v in spec.values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_safe, jobs))
    else:
        results = [_run_safe(j) for j in jobs]
    failures = {v: msg for v, (_, msg) in zip(spec.values, results) if msg is not None}
    for v, msg in failures.items():
        log.warning("sweep point %s=%g failed: %s", spec.param, v, msg)
    return SweepResult(spec=spec, trajectories=[tr for tr, _ in results], failures=failures)


# -- distances ---------------------------------------------------------------------

def _common_grid(trajs: Sequence[Trajectory]):
    g = trajs[0].grid
    for tr in trajs[1:]:
        if tr.grid.n_cells != g.n_cells or tr.grid.length != g.length:
            raise ValueError("trajectories live on different spatial grids")
        if not np.isclose(tr.t[-1], trajs[0].t[-1], rtol=1e-12, atol=1e-14):
            raise ValueError("trajectories cover different time intervals")
    coarsest = min(trajs, key=len)
    return g, coarsest.t


def _resample(tr: Trajectory, name: str, t: np.ndarray) -> np.ndarray:
    u = tr.field(name)
    if len(tr.t) == len(t) and np.allclose(tr.t, t, rtol=0, atol=1e-12):
        return u
    idx = np.searchsorted(tr.t, t, side="right") - 1
    idx = np.clip(idx, 0, len(tr.t) - 2)
    a = ((t - tr.t[idx]) / (tr.t[idx + 1] - tr.t[idx]))[:, None]
    return (1 - a) * u[idx] + a * u[idx + 1]


def _norm_in_time(grid: Grid, t, diff, norm):
    if norm == "C0H":
        return float(grid.norm_h(diff).max())
    if norm == "LinfVstar":
        return float(grid.dual_norm(diff).max())
    if norm == "L2Vstar":
        return float(np.sqrt(trapezoid(grid.dual_norm(diff) ** 2, t)))
    raise ValueError(f"unknown norm {norm!r}; choose from {NORMS}")


def distance(a: Trajectory, b: Trajectory, norm="C0H", name="phi") -> float:
    g, t = _common_grid([a, b])
    return _norm_in_time(g, t, _resample(a, name, t) - _resample(b, name, t), norm)


@dataclass
class ConvergenceReport:
    """Successive differences and, for the tau-limit, direct errors.

    Orders are empirical: ``log(d_k / d_{k+1}) / log(v_k / v_{k+1})``.
    """

    param: str
    values: list
    norm: str
    distances: list
    orders: list
    monotone: bool
    direct_errors: Optional[list] = None
    direct_monotone: Optional[bool] = None
    indicator: Optional[list] = None  # tau * sup_t ||phi_t||_*
    indicator_monotone: Optional[bool] = None
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "param": self.param,
            "values": list(self.values),
            "norm": self.norm,
            "distances": list(self.distances),
            "orders": list(self.orders),
            "orders_are_empirical": True,
            "monotone": self.monotone,
            "direct_errors": self.direct_errors,
            "direct_monotone": self.direct_monotone,
            "indicator": self.indicator,
            "indicator_monotone": self.indicator_monotone,
            "failures": {repr(k): v for k, v in self.failures.items()},
        }

    def rows(self):
        """Rows for a distances CSV: value, next value, distance, order."""
        out = []
        for k, d in enumerate(self.distances):
            order = self.orders[k - 1] if 0 < k <= len(self.orders) else float("nan")
            out.append((self.values[k], self.values[k + 1], d, order))
        return out


def _strictly_decreasing(xs):
    return all(b < a for a, b in zip(xs, xs[1:]))


def _orders(ds, values):
    out = []
    for k in range(len(ds) - 1):
        va, vb = values[k], values[k + 1]
        if ds[k] > 0 and ds[k + 1] > 0 and va > 0 and vb > 0 and va != vb:
            out.append(math.log(ds[k] / ds[k + 1]) / math.log(va / vb))
        else:
            out.append(float("nan"))
    return out


def cauchy_rates(trajs: Sequence[Trajectory], norm="C0H", values=None, name="phi",
                 param="") -> ConvergenceReport:
    """Distances ``d_k = dist(sol_k, sol_{k+1})`` over a common time grid."""
    if len(trajs) < 3:
        raise ValueError("cauchy_rates needs at least three trajectories")
    g, t = _common_grid(trajs)
    fields = [_resample(tr, name, t) for tr in trajs]
    ds = [_norm_in_time(g, t, a - b, norm) for a, b in zip(fields, fields[1:])]
    vals = list(values) if values is not None else [2.0**-k for k in range(len(trajs))]
    return ConvergenceReport(param=param, values=vals, norm=norm, distances=ds,
                             orders=_orders(ds, vals), monotone=_strictly_decreasing(ds))


def _frozen(p: Params):
    return (p.lam, p.eps, p.eta, p.beta, p.pi)


def limit_compare(tau_trajs: Sequence[Trajectory], limit_traj: Trajectory, norm="C0H",
                  taus=None, name="phi") -> ConvergenceReport:
    """Direct errors against the tau = 0 solution and the inertia indicator."""
    if limit_traj.params.tau != 0:
        raise ValueError("limit trajectory must come from a tau = 0 run")
    for tr in tau_trajs:
        if _frozen(tr.params) != _frozen(limit_traj.params):
            raise ValueError("frozen parameters (lambda, eps, eta, beta, pi) differ "
                             "between the sweep and the limit run")
    taus = [tr.params.tau for tr in tau_trajs] if taus is None else list(taus)
    g, t = _common_grid(list(tau_trajs) + [limit_traj])
    ref = _resample(limit_traj, name, t)
    errors = [_norm_in_time(g, t, _resample(tr, name, t) - ref, norm) for tr in tau_trajs]
    indicator = [tau * float(tr.grid.dual_norm(tr.phi_t).max())
                 for tau, tr in zip(taus, tau_trajs)]
    if len(tau_trajs) >= 2:
        fields = [_resample(tr, name, t) for tr in tau_trajs]
        ds = [_norm_in_time(g, t, a - b, norm) for a, b in zip(fields, fields[1:])]
    else:
        ds = []
    return ConvergenceReport(
        param="tau", values=taus, norm=norm, distances=ds, orders=_orders(errors, taus),
        monotone=_strictly_decreasing(ds), direct_errors=errors,
        direct_monotone=_strictly_decreasing(errors), indicator=indicator,
        indicator_monotone=_strictly_decreasing(indicator),
    )
