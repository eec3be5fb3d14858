import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from inertial_phasefield.config import Config, GeometryConfig, SchemeConfig
from inertial_phasefield.data_prep import Forcing
from inertial_phasefield.grid import Grid
from inertial_phasefield.system import Params, System, prepare_initial_data

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Filled by tests/test_acceptance.py, printed at the end of the session.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid64():
    return Grid(64)


def small_config(n_cells=32, T=0.1, dt=1e-3, **params) -> Config:
    cfg = Config(geometry=GeometryConfig(n_cells), scheme=SchemeConfig(T=T, dt=dt))
    if params:
        import dataclasses
        cfg = cfg.replace(params=dataclasses.replace(cfg.params, **params))
    return cfg


@pytest.fixture
def small_problem():
    return small_config().problem()


def make_system(params=None, phi0=None, v0=None, theta0=None, f=None, n=32):
    g = Grid(n)
    x = g.centers
    phi0 = 0.3 + 0.4 * np.cos(2 * np.pi * x) if phi0 is None else phi0
    v0 = 0.2 + 0.1 * np.cos(np.pi * x) if v0 is None else v0
    theta0 = 0.1 * np.cos(np.pi * x) if theta0 is None else theta0
    f = 0.5 * np.cos(np.pi * x) if f is None else f
    p = Params() if params is None else params
    data = prepare_initial_data(g, p.eps, theta0, phi0, v0, Forcing.static(f))
    return System(g, p, data)
