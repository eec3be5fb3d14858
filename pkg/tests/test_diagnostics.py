import dataclasses

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from inertial_phasefield.diagnostics import (
    UNIFORM_QUANTITIES,
    apriori_monitor,
    energy_ledger,
    mean_laws,
    weak_residual,
)
from inertial_phasefield.integrate import integrate
from inertial_phasefield.scalar_ops import yosida_scalar
from inertial_phasefield.system import Params
from inertial_phasefield.verify import observed_orders

from conftest import make_system

N = 32


def rest_system(c=0.4, **params):
    # constant phi with theta = beta_eps(c) + pi(c) makes mu vanish identically
    p = Params(**params)
    theta = float(yosida_scalar(p.beta, p.eps, c) + p.pi(c))
    ones = np.ones(N)
    return make_system(p, phi0=c * ones, v0=0 * ones, theta0=theta * ones, f=0 * ones)


@pytest.fixture(scope="module")
def default_run():
    s = make_system()
    return s, integrate(s, 0.5, 0.01)


class TestMeanLaws:
    def test_exact_curve_against_ode_solver(self, default_run):
        s, tr = default_run
        tau, d = s.params.tau, s.data
        sol = solve_ivp(lambda t, y: [y[1], -y[1] / tau], (0, tr.t[-1]), [d.m_phi0, d.m_v0],
                        t_eval=tr.t, rtol=1e-12, atol=1e-14)
        fake = dataclasses.replace(tr, phi=np.repeat(sol.y[0][:, None], N, axis=1),
                                   phi_t=np.repeat(sol.y[1][:, None], N, axis=1))
        assert mean_laws(fake, d).sup_defect < 1e-10

    def test_second_order_in_dt(self):
        s = make_system()
        defects = [mean_laws(integrate(s, 0.5, dt), s.data).sup_defect
                   for dt in (0.02, 0.01, 0.005)]
        assert np.allclose(observed_orders(defects), 2.0, atol=0.2)

    def test_yosida_w_has_zero_mean(self, default_run):
        s, tr = default_run
        assert mean_laws(tr, s.data).mean_yosida_w.max() < 1e-12

    def test_collapse_without_initial_velocity(self):
        s = make_system(v0=0.1 * np.cos(np.pi * (np.arange(N) + 0.5) / N))
        tr = integrate(s, 0.2, 0.01)
        rep = mean_laws(tr, s.data)
        assert abs(s.data.m_v0) < 1e-15
        assert rep.sup_defect < 1e-12

    def test_needs_inertia(self):
        s = make_system(Params(tau=0.0))
        with pytest.raises(ValueError, match="tau > 0"):
            mean_laws(integrate(s, 0.01, 1e-3), s.data)


class TestEnergy:
    def test_rest_state(self):
        s = rest_system()
        tr = integrate(s, 0.1, 0.01)
        led = energy_ledger(tr, s.data)
        assert np.ptp(led.energy) < 1e-14
        assert np.abs(led.residual).max() < 1e-14
        assert led.energy[0] > 0

    def test_dissipation_nonnegative(self, default_run):
        s, tr = default_run
        assert energy_ledger(tr, s.data).min_dissipation >= -1e-12

    def test_residual_second_order(self):
        s = make_system()
        res = [np.abs(energy_ledger(integrate(s, 0.5, dt), s.data).residual).max()
               for dt in (0.02, 0.01, 0.005)]
        assert np.allclose(observed_orders(res), 2.0, atol=0.2)

    def test_columns(self, default_run):
        s, tr = default_run
        cols = energy_ledger(tr, s.data).columns()
        assert list(cols)[0] == "t" and list(cols)[-1] == "residual"
        assert all(len(v) == len(tr) for v in cols.values())

    def test_needs_inertia(self):
        s = make_system(Params(tau=0.0))
        with pytest.raises(ValueError):
            energy_ledger(integrate(s, 0.01, 1e-3), s.data)


class TestApriori:
    def test_rest_values(self):
        s = rest_system()
        mon = apriori_monitor(integrate(s, 0.1, 0.01))
        assert mon.grad_phi_Linf_H < 1e-13 and mon.grad_theta_L2_H < 1e-13
        assert mon.phi_t_L2_Vstar < 1e-14
        assert mon.theta_Linf_H == pytest.approx(abs(s.data.theta0[0]))

    def test_uniform_entries(self, default_run):
        _, tr = default_run
        entries = apriori_monitor(tr).uniform_entries()
        assert tuple(entries) == UNIFORM_QUANTITIES
        assert all(np.isfinite(v) and v >= 0 for v in entries.values())


class TestWeakResidual:
    def test_rest_state(self):
        s = rest_system()
        rep = weak_residual(integrate(s, 0.1, 0.01), s.data)
        assert max(rep.summary()[k] for k in ("eq1", "eq2", "eq3", "eq2_quadrature")) < 1e-12

    def test_quadrature_form_small(self, default_run):
        s, tr = default_run
        assert weak_residual(tr, s.data).eq2_quadrature.max() < 1e-3

    def test_unregularized_larger(self, default_run):
        s, tr = default_run
        reg = weak_residual(tr, s.data).summary()
        raw = weak_residual(tr, s.data, regularized=False).summary()
        assert raw["eq3"] > 10 * reg["eq3"]
        assert raw["regularized"] is False

    def test_needs_three_samples(self):
        s = make_system()
        with pytest.raises(ValueError, match="three"):
            weak_residual(integrate(s, 0.01, 0.01), s.data)

    def test_second_order(self):
        s = make_system()
        res = [weak_residual(integrate(s, 0.5, dt), s.data).eq2.max()
               for dt in (0.02, 0.01, 0.005)]
        assert np.allclose(observed_orders(res), 2.0, atol=0.2)
