"""Property suites behind ``ipf verify`` and the acceptance tests.

Each suite returns one :class:`CheckResult` with the measured quantity and
the tolerance it was held to. ``tighten`` divides every tolerance (and the
half-width of every order band) by the given factor.
"""
from __future__ import annotations

import dataclasses
import filecmp
import math
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from .asymptotics import Problem, SweepSpec, cauchy_rates, limit_compare, sweep
from .config import Config, GeometryConfig, SchemeConfig, load_config
from .diagnostics import (
    UNIFORM_QUANTITIES,
    apriori_monitor,
    energy_ledger,
    mean_laws,
    weak_residual,
)
from .grid import Grid
from .integrate import integrate
from .linear_toy import toy_solution
from .scalar_ops import linear, make_nonlinearity, moreau_scalar, yosida_scalar, zero
from .system import System, prepare_initial_data

__all__ = ["CheckResult", "SUITES", "run_suites", "observed_orders", "format_table"]


@dataclass
class CheckResult:
    name: str
    measured: float
    tolerance: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<12} measured={self.measured:.6g}  tol: {self.tolerance}"


def observed_orders(errors, ratio=2.0):
    return [math.log(a / b) / math.log(ratio) if a > 0 and b > 0 else float("nan")
            for a, b in zip(errors, errors[1:])]


def _band(orders, target, half):
    worst = max(abs(o - target) for o in orders) if orders else float("nan")
    return worst, bool(orders) and worst <= half


def _decreasing(xs):
    return all(b < a for a, b in zip(xs, xs[1:]))


def _rel_excess(lhs, rhs):
    """Positive part of ``lhs - rhs`` relative to ``max(1, |rhs|)``."""
    return np.maximum(lhs - rhs, 0.0) / np.maximum(1.0, np.abs(rhs))


# -- 1. scalar Yosida suite ------------------------------------------------------

def check_scalar(cfg: Config, tighten=1.0, n_samples=10_000, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    beta = make_nonlinearity(cfg.params.beta.name, **cfg.params.beta.options)
    r = rng.uniform(-10.0, 10.0, n_samples)
    s = r + rng.normal(0.0, 0.5, n_samples)
    eps = 10.0 ** rng.uniform(-3.0, 0.0, n_samples)  # eps in (0, 1]
    b_eps, b_eps_s = yosida_scalar(beta, eps, r), yosida_scalar(beta, eps, s)
    env = moreau_scalar(beta, eps, r)
    prim = beta.primitive(r)
    q, c = beta.growth_exponent, beta.growth_constant
    worst = {
        "envelope_nonneg": float(np.max(_rel_excess(-env, 0.0))),
        "envelope_below": float(np.max(_rel_excess(env, prim))),
        "magnitude": float(np.max(_rel_excess(np.abs(b_eps), np.abs(beta(r))))),
        "lipschitz": float(np.max(_rel_excess(np.abs(b_eps - b_eps_s), np.abs(r - s) / eps))),
        "growth": float(np.max(_rel_excess(np.abs(b_eps) ** q, c * (1.0 + env)))),
    }
    tol = 1e-10 / tighten
    measured = max(worst.values())
    return CheckResult("scalar", measured, f"max violation <= {tol:g}", measured <= tol, worst)


# -- 2. operator identities ------------------------------------------------------------

def check_operators(cfg: Config, tighten=1.0, n_fields=100, seed=1) -> CheckResult:
    g = Grid(64, cfg.geometry.length)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n_fields, g.n_cells))
    v = rng.standard_normal((n_fields, g.n_cells))
    zu = u - u.mean(axis=1, keepdims=True)
    zv = v - v.mean(axis=1, keepdims=True)
    worst = {}
    h2 = g.inner_h(u, u)
    v2 = g.norm_v(u) ** 2
    for lam in (1.0, 0.1, 0.01):
        J = g.resolvent(lam, u)
        AJ = g.neg_laplacian(J)
        lhs1 = g.inner_h(J, J) + 2 * lam * g.grad_sq(J)
        lhs2 = g.norm_v(J) ** 2 + 2 * lam * (g.grad_sq(J) + g.inner_h(AJ, AJ))
        worst[f"H contraction lam={lam:g}"] = float(np.max(np.maximum(lhs1 - h2, 0) / h2))
        worst[f"V contraction lam={lam:g}"] = float(np.max(np.maximum(lhs2 - v2, 0) / v2))
    star = g.dual_norm(u)
    for lam in (0.4, 0.1, 0.01):
        js = g.dual_norm(g.resolvent(lam, u))
        worst[f"dual bound lam={lam:g}"] = float(np.max(np.maximum(js - 2 * star, 0) / star))
    Nu, Nv = g.inverse_neumann(zu), g.inverse_neumann(zv)
    a, b = g.inner_h(zu, Nv), g.inner_h(zv, Nu)
    # scaled by the Cauchy-Schwarz bound of either side
    scale = g.norm_h(zu) * g.norm_h(Nv)
    worst["N symmetric"] = float(np.max(np.abs(a - b) / scale))
    m = u.mean(axis=1)
    alt = g.inner_h(zu, Nu) + m**2
    worst["dual norm via N"] = float(np.max(np.abs(star**2 - alt) / alt))
    ANu = g.neg_laplacian(Nu)
    worst["A N psi = psi"] = float(np.max(np.linalg.norm(ANu - zu, axis=1)
                                          / np.linalg.norm(zu, axis=1)))
    NAu = g.inverse_neumann(g.neg_laplacian(u))
    worst["N A u = u - m"] = float(np.max(np.linalg.norm(NAu - zu, axis=1)
                                          / np.linalg.norm(zu, axis=1)))
    tol = 1e-10 / tighten
    measured = max(worst.values())
    return CheckResult("operators", measured, f"relative defect <= {tol:g}", measured <= tol,
                       worst)


# -- 3. dual-norm chain rule -----------------------------------------------------------

def chain_rule_defects(grid: Grid, dts=(1e-2, 5e-3, 2.5e-3), T=1.0):
    """Trapezoid quadrature of ``int <v_t, N v>`` against ``(|v(T)|_*^2 - |v(0)|_*^2)/2``.

    Manufactured path ``v = sin(t) cos(pi x) + t^2 cos(2 pi x)`` with zero mean.
    """
    c1, c2 = grid.cosine_mode(1), grid.cosine_mode(2)

    def path(t):
        t = np.asarray(t)[:, None]
        return np.sin(t) * c1 + t**2 * c2, np.cos(t) * c1 + 2 * t * c2

    exact = None
    defects = []
    for dt in dts:
        t = np.linspace(0.0, T, int(round(T / dt)) + 1)
        v, vt = path(t)
        integrand = grid.inner_h(vt, grid.inverse_neumann(v))
        quad = trapezoid(integrand, t)
        if exact is None:
            ends = grid.dual_norm(path([0.0, T])[0]) ** 2
            exact = 0.5 * (ends[1] - ends[0])
        defects.append(abs(quad - exact))
    return defects


def check_chain_rule(cfg: Config, tighten=1.0) -> CheckResult:
    defects = chain_rule_defects(Grid(64, cfg.geometry.length))
    orders = observed_orders(defects)
    half = 0.3 / tighten
    worst, ok = _band(orders, 2.0, half)
    return CheckResult("chain_rule", worst, f"|order - 2| <= {half:g}", ok,
                       {"defects": defects, "orders": orders})


# -- 4/5. mean laws and energy ledger -----------------------------------------------------

def _refinement_runs(cfg: Config, dts, T):
    problem = _problem(cfg, T=T, dt=dts[0])
    params = cfg.build_params()
    system = problem.system(params)
    return system, [integrate(system, T, dt, scheme="picard_midpoint", tol=problem.tol)
                    for dt in dts]


def check_mean_laws(cfg: Config, tighten=1.0, dts=(0.02, 0.01, 0.005), T=1.0) -> CheckResult:
    cfg = _with_params(cfg, tau=0.5)
    system, trajs = _refinement_runs(cfg, dts, T)
    reports = [mean_laws(tr, system.data) for tr in trajs]
    defects = [r.sup_defect for r in reports]
    orders = observed_orders(defects)
    half = 0.2 / tighten
    worst, ok_order = _band(orders, 2.0, half)
    a_w = max(float(r.mean_yosida_w.max()) for r in reports)
    w_tol = 1e-12 / tighten
    return CheckResult("mean_laws", worst,
                       f"|order - 2| <= {half:g} and mean(A_lam w) <= {w_tol:g}",
                       ok_order and a_w <= w_tol,
                       {"defects": defects, "orders": orders, "max_mean_yosida_w": a_w})


def check_energy(cfg: Config, tighten=1.0, dts=(0.02, 0.01, 0.005), T=1.0) -> CheckResult:
    system, trajs = _refinement_runs(cfg, dts, T)
    ledgers = [energy_ledger(tr, system.data) for tr in trajs]
    residuals = [float(np.max(np.abs(le.residual))) for le in ledgers]
    orders = observed_orders(residuals)
    half = 0.2 / tighten
    worst, ok_order = _band(orders, 2.0, half)
    min_d = min(le.min_dissipation for le in ledgers)
    d_tol = -1e-12 / tighten
    return CheckResult("energy", worst,
                       f"|order - 2| <= {half:g} and dissipation >= {d_tol:g}",
                       ok_order and min_d >= d_tol,
                       {"residuals": residuals, "orders": orders, "min_dissipation": min_d})


# -- 6-9. limits ---------------------------------------------------------------------

SWEEP_VALUES = tuple(2.0**-k for k in range(1, 6))
TAU_VALUES = tuple(2.0**-k for k in range(1, 7))


def _limit_problem(cfg: Config) -> Problem:
    return _problem(cfg, n_cells=64, T=0.25, dt=1e-3)


def _cauchy(cfg, param, values):
    spec = SweepSpec(param, values, cfg.build_params(), "C0H")
    result = sweep(spec, _limit_problem(cfg), workers=cfg.outputs.workers)
    if result.failures:
        return None, result
    return cauchy_rates(result.trajectories, "C0H", values=list(values), param=param), result


def check_lambda(cfg: Config, tighten=1.0) -> CheckResult:
    rep, result = _cauchy(cfg, "lambda", SWEEP_VALUES)
    if rep is None:
        return CheckResult("lambda", float("nan"), "strictly decreasing", False,
                           {"failures": result.failures})
    return CheckResult("lambda", rep.distances[-1], "C0H distances strictly decreasing",
                       rep.monotone, {"distances": rep.distances, "orders": rep.orders})


def check_eps(cfg: Config, tighten=1.0) -> CheckResult:
    rep, result = _cauchy(cfg, "eps", SWEEP_VALUES)
    if rep is None:
        return CheckResult("eps", float("nan"), "strictly decreasing", False,
                           {"failures": result.failures})
    monitors = [apriori_monitor(tr).uniform_entries() for tr in result.trajectories]
    factor = 1.0 + 4.0 / tighten
    spread = {}
    for key in UNIFORM_QUANTITIES:
        vals = [m[key] for m in monitors]
        spread[key] = max(vals) / min(vals) if min(vals) > 0 else float("inf")
    worst = max(spread.values())
    return CheckResult("eps", worst,
                       f"C0H distances strictly decreasing and a priori spread <= {factor:g}",
                       rep.monotone and worst <= factor,
                       {"distances": rep.distances, "orders": rep.orders, "spread": spread})


def check_eta(cfg: Config, tighten=1.0) -> CheckResult:
    rep, result = _cauchy(cfg, "eta", SWEEP_VALUES)
    if rep is None:
        return CheckResult("eta", float("nan"), "strictly decreasing", False,
                           {"failures": result.failures})
    entry = [apriori_monitor(tr).sqrt_eta_phi_t_L2_H for tr in result.trajectories]
    factor = 1.0 + 4.0 / tighten
    ratio = max(entry) / entry[0]
    return CheckResult("eta", ratio,
                       f"C0H distances strictly decreasing and max/first <= {factor:g}",
                       rep.monotone and ratio <= factor,
                       {"distances": rep.distances, "orders": rep.orders,
                        "sqrt_eta_phi_t_L2_H": entry})


def linear_toy_errors(cfg: Config, taus=TAU_VALUES + (0.0,), n=16, T=0.25, dt=2.5e-4):
    """Sup-norm gap between RK4 and the dense exponential oracle, per tau."""
    g = Grid(n, cfg.geometry.length)
    base = _with_params(cfg, tau=0.5)
    problem = _problem(base, n_cells=n, T=T, dt=dt)
    out = {}
    for tau in taus:
        params = base.build_params().replace(tau=tau, beta=linear(), pi=zero())
        data = prepare_initial_data(g, params.eps, problem.theta0, problem.phi0,
                                    problem.v0 - problem.v0.mean(), problem.forcing)
        tr = integrate(System(g, params, data), T, dt, scheme="rk4", save_every=int(round(0.01 / dt)))
        ex = toy_solution(n, params, data, tr.t, g.length)
        got = np.stack([tr.theta, tr.phi, tr.w], axis=1)
        out[tau] = float(np.max(np.abs(got - ex)))
    return out


def check_tau(cfg: Config, tighten=1.0) -> CheckResult:
    values = TAU_VALUES + (0.0,)
    spec = SweepSpec("tau", values, cfg.build_params(), "C0H")
    result = sweep(spec, _limit_problem(cfg), workers=cfg.outputs.workers)
    if result.failures:
        return CheckResult("tau", float("nan"), "no failures", False,
                           {"failures": result.failures})
    trajs = result.trajectories
    rep = limit_compare(trajs[:-1], trajs[-1], "C0H", taus=list(TAU_VALUES))
    toy = linear_toy_errors(cfg)
    toy_tol = 1e-8 / tighten
    toy_worst = max(toy.values())
    ok = rep.direct_monotone and rep.indicator_monotone and toy_worst <= toy_tol
    return CheckResult("tau", toy_worst,
                       f"errors and tau*sup|phi_t|_* strictly decreasing; toy gap <= {toy_tol:g}",
                       ok, {"direct_errors": rep.direct_errors, "indicator": rep.indicator,
                            "toy_gap": {repr(k): v for k, v in toy.items()}})


# -- 10. weak residuals ------------------------------------------------------------

def check_weak(cfg: Config, tighten=1.0, dts=(0.01, 0.005, 0.0025), T=1.0) -> CheckResult:
    cfg = _with_params(cfg, lam=0.1, eps=0.1)
    system, trajs = _refinement_runs(cfg, dts, T)
    reps = [weak_residual(tr, system.data).summary() for tr in trajs]
    half = 0.2 / tighten
    detail, worst, ok = {}, 0.0, True
    for key in ("eq1", "eq2", "eq3"):
        res = [r[key] for r in reps]
        orders = observed_orders(res)
        w, good = _band(orders, 2.0, half)
        detail[key] = {"residuals": res, "orders": orders}
        worst, ok = max(worst, w), ok and good
    return CheckResult("weak", worst, f"|order - 2| <= {half:g} for each equation", ok, detail)


# -- 11. reproducibility -------------------------------------------------------------

def check_repro(cfg: Config, tighten=1.0) -> CheckResult:
    from .artifacts import run_single

    small = cfg.replace(geometry=GeometryConfig(32, cfg.geometry.length),
                        scheme=SchemeConfig(name=cfg.scheme.name, T=0.1, dt=1e-3,
                                            tol=cfg.scheme.tol))
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp, "first"), Path(tmp, "second")
        run_single(small, first)
        run_single(load_config(first / "manifest.json"), second)
        names = sorted(p.name for p in first.iterdir())
        same = sorted(p.name for p in second.iterdir()) == names
        _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    ok = same and not mismatch and not errors
    return CheckResult("repro", float(len(mismatch) + len(errors)), "0 differing files", ok,
                       {"files": names, "mismatch": mismatch})


# -- helpers and registry ----------------------------------------------------------------

def _with_params(cfg: Config, **changes) -> Config:
    return cfg.replace(params=dataclasses.replace(cfg.params, **changes))


def _problem(cfg: Config, n_cells=None, T=None, dt=None) -> Problem:
    geometry = cfg.geometry if n_cells is None else GeometryConfig(n_cells, cfg.geometry.length)
    scheme = SchemeConfig(name="picard_midpoint", T=cfg.scheme.T if T is None else T,
                          dt=cfg.scheme.dt if dt is None else dt, tol=cfg.scheme.tol)
    return cfg.replace(geometry=geometry, scheme=scheme).problem()


SUITES: dict = {
    "scalar": check_scalar,
    "operators": check_operators,
    "chain_rule": check_chain_rule,
    "mean_laws": check_mean_laws,
    "energy": check_energy,
    "lambda": check_lambda,
    "eps": check_eps,
    "eta": check_eta,
    "tau": check_tau,
    "weak": check_weak,
    "repro": check_repro,
}


def run_suites(cfg: Optional[Config] = None, names=None, tighten=1.0,
               report: Optional[Callable] = None):
    """Run the selected suites (all when ``names`` is None) in registry order."""
    cfg = Config() if cfg is None else cfg
    selected = list(SUITES) if names is None else list(names)
    unknown = [n for n in selected if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    results = []
    for name in selected:
        res = SUITES[name](cfg, tighten=tighten)
        if report is not None:
            report(res)
        results.append(res)
    return results


def format_table(results) -> str:
    return "\n".join(r.line() for r in results)
