"""Approximating data for the regularized problem.

Initial data are smoothed by one elliptic solve ``(I + eps A) u_eps = u``;
the source term by the parabolic problem
``eps f_t + eps A f + f = f_src`` started from ``(I + eps A)^{-1} f_src(0)``.
Both preserve the mean exactly because A annihilates constants.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid
from .scalar_ops import ScalarMonotone, moreau_scalar

__all__ = [
    "Forcing",
    "DataCertificate",
    "PROFILE_KINDS",
    "make_profile",
    "make_forcing",
    "mollify_elliptic",
    "mollify_dual",
    "mollify_forcing",
    "certify_data",
]


@dataclass(frozen=True)
class Forcing:
    """Source term sampled on a uniform time grid, linearly interpolated.

    A single sample means a time-independent source.
    """

    times: np.ndarray
    samples: np.ndarray

    @classmethod
    def static(cls, profile):
        profile = np.asarray(profile, dtype=float)
        return cls(times=np.zeros(1), samples=profile[None, :].copy())

    @property
    def is_static(self) -> bool:
        return self.samples.shape[0] == 1

    def __call__(self, t: float) -> np.ndarray:
        if self.is_static:
            return self.samples[0]
        times = self.times
        if t <= times[0]:
            return self.samples[0]
        if t >= times[-1]:
            return self.samples[-1]
        h = times[1] - times[0]
        k = min(int((t - times[0]) // h), len(times) - 2)
        a = (t - times[k]) / h
        return (1.0 - a) * self.samples[k] + a * self.samples[k + 1]


# -- profile presets ------------------------------------------------------------

def _constant(grid, value=0.0):
    return np.full(grid.n_cells, float(value))


def _cosine(grid, mean=0.0, amplitude=1.0, mode=1):
    return mean + amplitude * grid.cosine_mode(mode)


def _step(grid, mean=0.0, amplitude=1.0, width=0.05, center=None):
    c = grid.length / 2 if center is None else center
    return mean + amplitude * np.tanh((grid.centers - c) / width)


def _noise(grid, mean=0.0, amplitude=0.1, seed=0):
    rng = np.random.default_rng(seed)
    return mean + amplitude * rng.uniform(-1.0, 1.0, grid.n_cells)


def _csv(grid, path):
    with open(Path(path), newline="") as fh:
        values = [float(v) for row in csv.reader(fh) for v in row if v.strip()]
    return grid.check(np.asarray(values))


PROFILE_KINDS = {
    "constant": _constant,
    "cosine": _cosine,
    "step": _step,
    "noise": _noise,
    "csv": _csv,
}


def make_profile(grid: Grid, kind: str, **params) -> np.ndarray:
    """Evaluate a named spatial profile on the cell centers."""
    try:
        fn = PROFILE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown profile {kind!r}; choose from {sorted(PROFILE_KINDS)}")
    return fn(grid, **params)


def make_forcing(grid: Grid, profile: np.ndarray, T: float, dt: float, time_kind="constant",
                 frequency=1.0, amplitude=0.5) -> Forcing:
    """Source ``profile(x) * g(t)``; ``g = 1`` or ``1 + amplitude sin(2 pi frequency t)``."""
    if time_kind == "constant":
        return Forcing.static(profile)
    if time_kind != "sine":
        raise ValueError(f"unknown forcing time dependence {time_kind!r}")
    n_steps = max(1, int(round(T / dt)))
    times = np.linspace(0.0, n_steps * dt, n_steps + 1)
    g = 1.0 + amplitude * np.sin(2 * np.pi * frequency * times)
    return Forcing(times=times, samples=g[:, None] * np.asarray(profile)[None, :])


# -- mollifiers -------------------------------------------------------------------

def mollify_elliptic(grid: Grid, eps: float, u0) -> np.ndarray:
    """``(I + eps A)^{-1} u0``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return grid.solve_shifted(eps, u0)


def mollify_dual(grid: Grid, eps: float, v0) -> np.ndarray:
    # With V* elements stored through their H representatives the variational
    # problem (v, z)_H + eps (grad v, grad z) = <v0, z> is the same solve.
    return mollify_elliptic(grid, eps, v0)


def mollify_forcing(grid: Grid, eps: float, f: Forcing) -> Forcing:
    """Implicit-Euler solution of ``eps f_t + eps A f + f = f_src``.

    A static source is returned as its (exact) steady state
    ``(I + eps A)^{-1} f_src``, which is also the prescribed initial value.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    first = grid.solve_shifted(eps, f.samples[0])
    if f.is_static:
        return Forcing.static(first)
    out = np.empty_like(f.samples)
    out[0] = first
    for k in range(1, len(f.times)):
        h = f.times[k] - f.times[k - 1]
        # ((eps/h + 1) I + eps A) f_k = (eps/h) f_{k-1} + src_k
        scale = eps / h + 1.0
        rhs = (eps / h * out[k - 1] + f.samples[k]) / scale
        out[k] = grid.solve_shifted(eps / scale, rhs)
    return Forcing(times=f.times.copy(), samples=out)


# -- certification --------------------------------------------------------------------

@dataclass(frozen=True)
class DataCertificate:
    energy_eps: float  # int beta_eps^(phi0_eps)
    energy_eps_raw: float  # int beta_eps^(phi0)
    energy_bound: float  # int beta^(phi0)
    mean_residual_phi: float
    mean_residual_v: float
    energy_ok: bool
    means_ok: bool

    @property
    def ok(self) -> bool:
        return self.energy_ok and self.means_ok


def certify_data(grid: Grid, eps: float, beta: ScalarMonotone, phi0eps, phi0, v0eps, v0,
                 mean_tol=1e-12, mean_bound=None, rtol=1e-12) -> DataCertificate:
    """Check the energy bound and the mean conditions on mollified data.

    With ``mean_bound=None`` the means must agree to ``mean_tol``; otherwise
    only ``|m(phi0_eps)|, |m(v0_eps)| <= mean_bound`` is required.
    """
    e_eps = float(grid.dx * np.sum(moreau_scalar(beta, eps, grid.check(phi0eps))))
    e_eps_raw = float(grid.dx * np.sum(moreau_scalar(beta, eps, grid.check(phi0))))
    e_raw = float(grid.dx * np.sum(beta.primitive(phi0)))
    res_phi = abs(float(grid.mean(phi0eps) - grid.mean(phi0)))
    res_v = abs(float(grid.mean(v0eps) - grid.mean(v0)))
    slack = rtol * max(1.0, e_raw)
    energy_ok = 0.0 <= e_eps <= e_eps_raw + slack and e_eps_raw <= e_raw + slack
    if mean_bound is None:
        means_ok = res_phi <= mean_tol and res_v <= mean_tol
    else:
        means_ok = (abs(float(grid.mean(phi0eps))) <= mean_bound
                    and abs(float(grid.mean(v0eps))) <= mean_bound)
    return DataCertificate(e_eps, e_eps_raw, e_raw, res_phi, res_v, energy_ok, means_ok)
