import numpy as np
import pytest

from inertial_phasefield.integrate import (
    LIPSCHITZ_FACTOR,
    IntegrationFailure,
    StepRejected,
    integrate,
    lipschitz_estimate,
    step_newton_midpoint,
    step_picard_midpoint,
    step_rk4,
)
from inertial_phasefield.scalar_ops import linear, neg_linear, zero
from inertial_phasefield.system import Params
from inertial_phasefield.verify import observed_orders

from conftest import make_system


def final_error(system, dt, scheme, ref, T):
    tr = integrate(system, T, dt, scheme=scheme)
    return np.abs(np.stack([tr.theta[-1], tr.phi[-1], tr.w[-1]]) - ref).max()


class TestSteps:
    def test_rk4_exact_on_cubic_polynomial(self):
        # U' = 3 t^2 is integrated exactly by a fourth-order method
        f = lambda t, U: np.full_like(U, 3 * t**2)  # noqa: E731
        U = step_rk4(f, 0.5, 0.25, np.zeros(3))
        assert np.allclose(U, 0.75**3 - 0.5**3, atol=1e-15)

    def test_rk4_guard(self):
        with pytest.raises(StepRejected) as info:
            step_rk4(lambda t, U: U, 0.0, 1.0, np.ones(2), guard=0.5)
        assert info.value.bound == 0.5

    def test_midpoint_linear_decay(self):
        f = lambda t, U: -2.0 * U  # noqa: E731
        dt = 0.1
        U = step_picard_midpoint(f, 0.0, dt, np.ones(2))
        assert np.allclose(U, (1 - dt) / (1 + dt), atol=1e-13)

    def test_newton_agrees_with_picard(self):
        s = make_system()
        U0 = s.initial_state().as_array()
        a = step_picard_midpoint(s.rhs, 0.0, 1e-3, U0)
        b = step_newton_midpoint(s.rhs, 0.0, 1e-3, U0)
        assert np.allclose(a, b, rtol=0, atol=1e-10)


class TestLipschitz:
    def test_all_unit(self):
        p = Params(tau=1.0, eta=1.0, eps=1.0, lam=1.0, pi=neg_linear(1.0))
        assert lipschitz_estimate(p) == LIPSCHITZ_FACTOR

    def test_default(self):
        # 1/(tau lam) = 20 dominates
        assert lipschitz_estimate(Params()) == pytest.approx(100.0)

    def test_limit(self):
        assert lipschitz_estimate(Params(tau=0.0, lam=0.5, eps=0.25)) == 16 * 16


class TestIntegrate:
    def test_zero_horizon(self):
        tr = integrate(make_system(), 0.0, 1e-3)
        assert len(tr) == 1 and tr.t[0] == 0.0

    def test_rest_state_unchanged(self):
        p = Params(beta=linear(), pi=zero())
        z = np.zeros(32)
        s = make_system(p, phi0=z, v0=z, theta0=z, f=z)
        tr = integrate(s, 0.05, 0.01, scheme="rk4")
        assert np.all(tr.phi == 0) and np.all(tr.theta == 0) and np.all(tr.w == 0)

    def test_horizon_not_multiple(self):
        with pytest.raises(ValueError, match="multiple"):
            integrate(make_system(), 0.1, 0.03)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            integrate(make_system(), 0.1, 0.01, scheme="euler")

    def test_save_every(self):
        tr = integrate(make_system(), 0.1, 0.01, save_every=4)
        assert np.allclose(tr.t, [0.0, 0.04, 0.08, 0.1])

    def test_failure_carries_partial(self):
        s = make_system()
        with pytest.raises(IntegrationFailure) as info:
            integrate(s, 0.1, 0.05, scheme="rk4")
        assert len(info.value.partial) == 1
        assert isinstance(info.value.__cause__, StepRejected)

    def test_stored_derivatives_match_rhs(self):
        s = make_system()
        tr = integrate(s, 0.01, 1e-3)
        dU = s.rhs(tr.t[-1], np.stack([tr.theta[-1], tr.phi[-1], tr.w[-1]]))
        assert np.array_equal(tr.phi_t[-1], dU[1]) and np.array_equal(tr.mu[-1], dU[2])

    def test_midpoint_mean_recurrence(self):
        s = make_system()
        tau, dt, n = s.params.tau, 0.01, 50
        tr = integrate(s, n * dt, dt)
        m0 = s.data.m0(tau)
        R = (1 - dt / (2 * tau)) / (1 + dt / (2 * tau))
        expected = m0 + (s.data.m_phi0 - m0) * R ** np.arange(n + 1)
        assert np.allclose(tr.phi.mean(axis=1), expected, rtol=0, atol=1e-12)


def test_rk4_fourth_order():
    s = make_system(n=16)
    T = 0.2
    ref_tr = integrate(s, T, 0.005 / 16, scheme="rk4")
    ref = np.stack([ref_tr.theta[-1], ref_tr.phi[-1], ref_tr.w[-1]])
    errs = [final_error(s, dt, "rk4", ref, T) for dt in (0.02, 0.01, 0.005)]
    assert np.allclose(observed_orders(errs), 4.0, atol=0.3)


def test_midpoint_second_order():
    s = make_system(n=16)
    T = 0.2
    ref_tr = integrate(s, T, 0.005 / 16)
    ref = np.stack([ref_tr.theta[-1], ref_tr.phi[-1], ref_tr.w[-1]])
    errs = [final_error(s, dt, "picard_midpoint", ref, T) for dt in (0.02, 0.01, 0.005)]
    assert np.allclose(observed_orders(errs), 2.0, atol=0.2)


def test_limit_system_integrates():
    s = make_system(Params(tau=0.0, lam=0.25, eps=0.25), n=16)
    tr = integrate(s, 0.05, 1e-3)
    assert np.allclose(tr.phi.mean(axis=1), s.data.m_phi0, atol=1e-12)
