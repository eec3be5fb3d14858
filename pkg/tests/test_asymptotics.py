import dataclasses

import numpy as np
import pytest

from inertial_phasefield import asymptotics
from inertial_phasefield.asymptotics import (
    SweepSpec,
    auto_dt,
    cauchy_rates,
    distance,
    limit_compare,
    run_point,
    sweep,
)
from inertial_phasefield.data_prep import Forcing
from inertial_phasefield.integrate import IntegrationFailure, integrate, lipschitz_estimate
from inertial_phasefield.linear_toy import toy_solution
from inertial_phasefield.scalar_ops import linear, zero
from inertial_phasefield.system import Params

from conftest import make_system, small_config


@pytest.fixture(scope="module")
def problem():
    return small_config(n_cells=16, T=0.1, dt=1e-3).problem()


class TestSweepSpec:
    def test_values_must_decrease(self):
        with pytest.raises(ValueError, match="decreasing"):
            SweepSpec("eta", (0.1, 0.2))

    def test_positive(self):
        with pytest.raises(ValueError, match="positive"):
            SweepSpec("lambda", (0.5, 0.0))

    def test_tau_may_end_at_zero(self):
        assert SweepSpec("tau", (0.5, 0.25, 0.0)).values[-1] == 0.0
        with pytest.raises(ValueError):
            SweepSpec("tau", (0.5, 0.0, -0.1))

    def test_unknown(self):
        with pytest.raises(ValueError, match="sweep parameter"):
            SweepSpec("mass", (1.0,))
        with pytest.raises(ValueError, match="norm"):
            SweepSpec("eta", (1.0,), norm="L1")

    def test_params_at(self):
        assert SweepSpec("lambda", (0.5,)).params_at(0.125).lam == 0.125


class TestAutoDt:
    def test_no_change_when_stable(self):
        assert auto_dt(Params(), 1e-3, "rk4") == (1e-3, 0)

    def test_halves_until_bound(self):
        p = Params(lam=2.0**-8, tau=2.0**-4)
        dt, k = auto_dt(p, 1e-2, "picard_midpoint")
        assert dt * lipschitz_estimate(p) <= 2.0 < 2 * dt * lipschitz_estimate(p)
        assert dt == 1e-2 / 2**k

    def test_saved_on_base_grid(self, problem):
        p = Params(lam=2.0**-12)
        tr = run_point(problem, p)
        assert auto_dt(p, problem.dt, problem.scheme)[1] > 0
        assert np.allclose(tr.t, np.linspace(0, 0.1, 101), atol=1e-12)


class TestSweep:
    def test_single_value(self, problem):
        res = sweep(SweepSpec("eta", (0.5,)), problem)
        assert len(res.trajectories) == 1 and not res.failures

    def test_failure_recorded(self, problem, monkeypatch):
        real = asymptotics.run_point

        def flaky(prob, params):
            if params.eta == 0.25:
                raise IntegrationFailure("boom", None)
            return real(prob, params)

        monkeypatch.setattr(asymptotics, "run_point", flaky)
        res = sweep(SweepSpec("eta", (0.5, 0.25, 0.125)), problem)
        assert res.failures == {0.25: "boom"}
        vals, trs = res.succeeded
        assert vals == [0.5, 0.125] and len(trs) == 2

    def test_workers_match_serial(self, problem):
        spec = SweepSpec("eta", (0.5, 0.25))
        a = sweep(spec, problem, workers=1)
        b = sweep(spec, problem, workers=2)
        for x, y in zip(a.trajectories, b.trajectories):
            assert np.array_equal(x.phi, y.phi)


class TestDistances:
    def test_identical_is_zero(self, problem):
        tr = run_point(problem, Params())
        rep = cauchy_rates([tr, tr, tr], values=[0.5, 0.25, 0.125])
        assert rep.distances == [0.0, 0.0]
        assert rep.to_dict()["orders_are_empirical"] is True

    def test_needs_three(self, problem):
        tr = run_point(problem, Params())
        with pytest.raises(ValueError, match="three"):
            cauchy_rates([tr, tr])

    def test_grid_mismatch(self, problem):
        a = run_point(problem, Params())
        other = small_config(n_cells=8, T=0.1, dt=1e-3).problem()
        with pytest.raises(ValueError, match="spatial grids"):
            distance(a, run_point(other, Params()))

    def test_interval_mismatch(self, problem):
        a = run_point(problem, Params())
        shorter = dataclasses.replace(problem, T=0.05)
        with pytest.raises(ValueError, match="time intervals"):
            distance(a, run_point(shorter, Params()))

    def test_norm_ordering(self, problem):
        a = run_point(problem, Params())
        b = run_point(problem, Params(eta=0.25))
        mu1 = problem.grid.eigenvalue(1)
        c0h = distance(a, b, "C0H")
        assert distance(a, b, "LinfVstar") <= max(1, 1 / np.sqrt(mu1)) * c0h * (1 + 1e-12)
        assert distance(a, b, "L2Vstar") <= np.sqrt(problem.T) * distance(a, b, "LinfVstar") * (1 + 1e-9)

    def test_resample_coarser(self, problem):
        a = run_point(problem, Params())
        fine = dataclasses.replace(problem, dt=5e-4)
        b = run_point(fine, Params())
        assert distance(a, b) < 1e-5


class TestLimitCompare:
    def test_requires_limit_run(self, problem):
        tr = run_point(problem, Params())
        with pytest.raises(ValueError, match="tau = 0"):
            limit_compare([tr], tr)

    def test_frozen_mismatch(self, problem):
        lim = run_point(problem, Params(tau=0.0))
        tr = run_point(problem, Params(eta=0.25))
        with pytest.raises(ValueError, match="frozen"):
            limit_compare([tr], lim)

    def test_errors_shrink(self, problem):
        taus = (0.25, 0.125, 0.0625)
        trs = [run_point(problem, Params(tau=t)) for t in taus]
        rep = limit_compare(trs, run_point(problem, Params(tau=0.0)))
        assert rep.direct_monotone and rep.values == list(taus)
        assert len(rep.indicator) == 3


def test_rk4_matches_dense_toy():
    p = Params(beta=linear(), pi=zero(), tau=0.25, lam=0.25)
    s = make_system(p, n=16)
    tr = integrate(s, 0.1, 1e-3, scheme="rk4")
    exact = toy_solution(16, p, s.data, tr.t)
    assert np.abs(tr.phi - exact[:, 1]).max() < 1e-10
    assert np.abs(tr.theta - exact[:, 0]).max() < 1e-10


def test_toy_needs_static_forcing():
    p = Params(beta=linear(), pi=zero())
    s = make_system(p, n=8)
    data = dataclasses.replace(s.data, forcing=Forcing(np.array([0.0, 1.0]), np.zeros((2, 8))))
    with pytest.raises(ValueError, match="time-independent"):
        toy_solution(8, p, data, [0.0])
