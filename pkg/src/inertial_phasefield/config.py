"""JSON run configuration.

Sections: ``geometry``, ``params``, ``data``, ``scheme``, ``sweep``,
``outputs`` and a top-level ``seed``. Every section is optional; missing keys
take the defaults below. Unknown keys are rejected with the offending path.

Example::

    {
      "geometry": {"n_cells": 128, "length": 1.0},
      "params": {"tau": 0.5, "eta": 0.5, "eps": 0.1, "lambda": 0.1,
                 "beta": {"name": "cubic"}, "pi": {"name": "linear", "k": 1.0}},
      "data": {"phi0": {"kind": "cosine", "mean": 0.3, "amplitude": 0.4, "mode": 2}},
      "scheme": {"name": "picard_midpoint", "T": 1.0, "dt": 0.001},
      "sweep": {"param": "lambda", "values": [0.5, 0.25, 0.125], "norm": "C0H"},
      "outputs": {"directory": "runs/default"},
      "seed": 0
    }
"""
from __future__ import annotations

import dataclasses
import inspect
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .asymptotics import NORMS, SWEEP_PARAMS, Problem, SweepSpec
from .data_prep import PROFILE_KINDS, make_forcing, make_profile
from .grid import Grid
from .integrate import SCHEMES
from .scalar_ops import NONLINEARITIES, PERTURBATIONS, make_nonlinearity, make_perturbation
from .system import Params

__all__ = [
    "ConfigError",
    "GeometryConfig",
    "OperatorConfig",
    "ParamsConfig",
    "ProfileConfig",
    "ForcingConfig",
    "DataConfig",
    "SchemeConfig",
    "SweepConfig",
    "OutputConfig",
    "Config",
    "load_config",
    "parse_config",
]


class ConfigError(ValueError):
    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _check_keys(d, allowed, path):
    if not isinstance(d, dict):
        raise ConfigError(f"expected an object, got {type(d).__name__}", path)
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key; allowed: {sorted(allowed)}", _join(path, unknown[0]))


def _number(v, path, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", path)
    if integer and int(v) != v:
        raise ConfigError(f"expected an integer, got {v!r}", path)
    return int(v) if integer else float(v)


def _join(path, key):
    return f"{path}.{key}" if path else key


def _kwargs_ok(fn, kwargs, path, skip=1):
    names = list(inspect.signature(fn).parameters)[skip:]
    unknown = sorted(set(kwargs) - set(names))
    if unknown:
        raise ConfigError(f"unknown parameter(s) {unknown}; allowed: {names}", path)


@dataclass
class GeometryConfig:
    n_cells: int = 128
    length: float = 1.0

    @classmethod
    def from_dict(cls, d, path="geometry"):
        _check_keys(d, {"n_cells", "length"}, path)
        out = cls(n_cells=_number(d.get("n_cells", 128), _join(path, "n_cells"), integer=True),
                  length=_number(d.get("length", 1.0), _join(path, "length")))
        try:
            out.build()
        except ValueError as exc:
            raise ConfigError(str(exc), path) from exc
        return out

    def build(self) -> Grid:
        return Grid(self.n_cells, self.length)


@dataclass
class OperatorConfig:
    """A registry name plus keyword parameters for its factory."""

    name: str
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, **self.options}

    @classmethod
    def from_dict(cls, d, registry, path):
        if not isinstance(d, dict) or "name" not in d:
            raise ConfigError("expected an object with a 'name' key", path)
        name = d["name"]
        if name not in registry:
            raise ConfigError(f"unknown name {name!r}; choose from {sorted(registry)}", path)
        options = {k: _number(v, _join(path, k)) for k, v in d.items() if k != "name"}
        _kwargs_ok(registry[name], options, path, skip=0)
        return cls(name=name, options=options)


@dataclass
class ParamsConfig:
    tau: float = 0.5
    eta: float = 0.5
    eps: float = 0.1
    lam: float = 0.1
    beta: OperatorConfig = field(default_factory=lambda: OperatorConfig("cubic"))
    pi: OperatorConfig = field(default_factory=lambda: OperatorConfig("linear"))

    def to_dict(self):
        return {"tau": self.tau, "eta": self.eta, "eps": self.eps, "lambda": self.lam,
                "beta": self.beta.to_dict(), "pi": self.pi.to_dict()}

    @classmethod
    def from_dict(cls, d, path="params"):
        _check_keys(d, {"tau", "eta", "eps", "lambda", "beta", "pi"}, path)
        kw = {}
        for key, attr in (("tau", "tau"), ("eta", "eta"), ("eps", "eps"), ("lambda", "lam")):
            if key in d:
                kw[attr] = _number(d[key], _join(path, key))
        if "beta" in d:
            kw["beta"] = OperatorConfig.from_dict(d["beta"], NONLINEARITIES, _join(path, "beta"))
        if "pi" in d:
            kw["pi"] = OperatorConfig.from_dict(d["pi"], PERTURBATIONS, _join(path, "pi"))
        out = cls(**kw)
        try:
            out.build()
        except ValueError as exc:
            key = str(exc).split()[0]
            raise ConfigError(str(exc), _join(path, key)) from exc
        return out

    def build(self) -> Params:
        return Params(tau=self.tau, eta=self.eta, eps=self.eps, lam=self.lam,
                      beta=make_nonlinearity(self.beta.name, **self.beta.options),
                      pi=make_perturbation(self.pi.name, **self.pi.options))


@dataclass
class ProfileConfig:
    kind: str = "constant"
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, **self.options}

    @classmethod
    def from_dict(cls, d, path):
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("expected an object with a 'kind' key", path)
        kind = d["kind"]
        if kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind {kind!r}; choose from {sorted(PROFILE_KINDS)}",
                              path)
        options = {}
        for k, v in d.items():
            if k == "kind":
                continue
            options[k] = v if k == "path" else _number(v, _join(path, k), integer=k in ("mode", "seed"))
        _kwargs_ok(PROFILE_KINDS[kind], options, path)
        return cls(kind=kind, options=options)

    def build(self, grid, seed=0):
        options = dict(self.options)
        if self.kind == "noise":
            options.setdefault("seed", seed)
        return make_profile(grid, self.kind, **options)


@dataclass
class ForcingConfig:
    profile: ProfileConfig = field(
        default_factory=lambda: ProfileConfig("cosine", {"amplitude": 0.5}))
    time: str = "constant"
    frequency: float = 1.0
    amplitude: float = 0.5

    def to_dict(self):
        return {"profile": self.profile.to_dict(), "time": self.time,
                "frequency": self.frequency, "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, d, path="data.forcing"):
        _check_keys(d, {"profile", "time", "frequency", "amplitude"}, path)
        kw = {}
        if "profile" in d:
            kw["profile"] = ProfileConfig.from_dict(d["profile"], _join(path, "profile"))
        if "time" in d:
            if d["time"] not in ("constant", "sine"):
                raise ConfigError(f"expected 'constant' or 'sine', got {d['time']!r}",
                                  _join(path, "time"))
            kw["time"] = d["time"]
        for key in ("frequency", "amplitude"):
            if key in d:
                kw[key] = _number(d[key], _join(path, key))
        return cls(**kw)


@dataclass
class DataConfig:
    theta0: ProfileConfig = field(
        default_factory=lambda: ProfileConfig("cosine", {"amplitude": 0.1}))
    phi0: ProfileConfig = field(
        default_factory=lambda: ProfileConfig("cosine", {"mean": 0.3, "amplitude": 0.4, "mode": 2}))
    v0: ProfileConfig = field(
        default_factory=lambda: ProfileConfig("cosine", {"mean": 0.2, "amplitude": 0.1}))
    forcing: ForcingConfig = field(default_factory=ForcingConfig)

    def to_dict(self):
        return {"theta0": self.theta0.to_dict(), "phi0": self.phi0.to_dict(),
                "v0": self.v0.to_dict(), "forcing": self.forcing.to_dict()}

    @classmethod
    def from_dict(cls, d, path="data"):
        _check_keys(d, {"theta0", "phi0", "v0", "forcing"}, path)
        kw = {k: ProfileConfig.from_dict(d[k], _join(path, k))
              for k in ("theta0", "phi0", "v0") if k in d}
        if "forcing" in d:
            kw["forcing"] = ForcingConfig.from_dict(d["forcing"], _join(path, "forcing"))
        return cls(**kw)


@dataclass
class SchemeConfig:
    name: str = "picard_midpoint"
    T: float = 1.0
    dt: float = 1e-3
    tol: float = 1e-13
    save_every: int = 1

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d, path="scheme"):
        _check_keys(d, {"name", "T", "dt", "tol", "save_every"}, path)
        kw = {}
        if "name" in d:
            if d["name"] not in SCHEMES:
                raise ConfigError(f"unknown scheme {d['name']!r}; choose from {list(SCHEMES)}",
                                  _join(path, "name"))
            kw["name"] = d["name"]
        for key in ("T", "dt", "tol"):
            if key in d:
                kw[key] = _number(d[key], _join(path, key))
        if "save_every" in d:
            kw["save_every"] = _number(d["save_every"], _join(path, "save_every"), integer=True)
        out = cls(**kw)
        if not out.dt > 0:
            raise ConfigError("dt must be > 0", _join(path, "dt"))
        if not out.T >= 0:
            raise ConfigError("T must be >= 0", _join(path, "T"))
        n = round(out.T / out.dt)
        if abs(n * out.dt - out.T) > 1e-9 * max(out.T, out.dt):
            raise ConfigError("T must be an integer multiple of dt", _join(path, "T"))
        if out.save_every < 1:
            raise ConfigError("save_every must be >= 1", _join(path, "save_every"))
        return out


@dataclass
class SweepConfig:
    param: str = "lambda"
    values: tuple = (0.5, 0.25, 0.125, 0.0625, 0.03125)
    norm: str = "C0H"

    def to_dict(self):
        return {"param": self.param, "values": list(self.values), "norm": self.norm}

    @classmethod
    def from_dict(cls, d, path="sweep"):
        _check_keys(d, {"param", "values", "norm"}, path)
        kw = {}
        if "param" in d:
            if d["param"] not in SWEEP_PARAMS:
                raise ConfigError(f"unknown sweep parameter {d['param']!r}; "
                                  f"choose from {sorted(SWEEP_PARAMS)}", _join(path, "param"))
            kw["param"] = d["param"]
        if "values" in d:
            if not isinstance(d["values"], list):
                raise ConfigError("expected a list", _join(path, "values"))
            kw["values"] = tuple(_number(v, f"{path}.values[{i}]")
                                 for i, v in enumerate(d["values"]))
        if "norm" in d:
            if d["norm"] not in NORMS:
                raise ConfigError(f"unknown norm {d['norm']!r}; choose from {list(NORMS)}",
                                  _join(path, "norm"))
            kw["norm"] = d["norm"]
        out = cls(**kw)
        try:
            out.build(Params())
        except ValueError as exc:
            raise ConfigError(str(exc), _join(path, "values")) from exc
        return out

    def build(self, base: Params) -> SweepSpec:
        return SweepSpec(self.param, self.values, base, self.norm)


@dataclass
class OutputConfig:
    directory: str = "runs/default"
    workers: int = 1

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d, path="outputs"):
        _check_keys(d, {"directory", "workers"}, path)
        kw = {}
        if "directory" in d:
            if not isinstance(d["directory"], str):
                raise ConfigError("expected a string", _join(path, "directory"))
            kw["directory"] = d["directory"]
        if "workers" in d:
            kw["workers"] = _number(d["workers"], _join(path, "workers"), integer=True)
            if kw["workers"] < 1:
                raise ConfigError("workers must be >= 1", _join(path, "workers"))
        return cls(**kw)


@dataclass
class Config:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    params: ParamsConfig = field(default_factory=ParamsConfig)
    data: DataConfig = field(default_factory=DataConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    sweep: Optional[SweepConfig] = None
    outputs: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    SECTIONS = ("geometry", "params", "data", "scheme", "sweep", "outputs", "seed")

    def to_dict(self) -> dict:
        return {
            "geometry": dataclasses.asdict(self.geometry),
            "params": self.params.to_dict(),
            "data": self.data.to_dict(),
            "scheme": self.scheme.to_dict(),
            "sweep": None if self.sweep is None else self.sweep.to_dict(),
            "outputs": self.outputs.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d) -> "Config":
        _check_keys(d, cls.SECTIONS, "")
        kw = {}
        for name, sub in (("geometry", GeometryConfig), ("params", ParamsConfig),
                          ("data", DataConfig), ("scheme", SchemeConfig),
                          ("outputs", OutputConfig)):
            if name in d:
                kw[name] = sub.from_dict(d[name])
        if d.get("sweep") is not None:
            kw["sweep"] = SweepConfig.from_dict(d["sweep"])
        if "seed" in d:
            kw["seed"] = _number(d["seed"], "seed", integer=True)
        return cls(**kw)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    # -- builders ------------------------------------------------------------

    def grid(self) -> Grid:
        return self.geometry.build()

    def build_params(self) -> Params:
        return self.params.build()

    def problem(self) -> Problem:
        g = self.grid()
        d = self.data
        f = d.forcing
        forcing = make_forcing(g, f.profile.build(g, self.seed), self.scheme.T, self.scheme.dt,
                               time_kind=f.time, frequency=f.frequency, amplitude=f.amplitude)
        return Problem(grid=g, theta0=d.theta0.build(g, self.seed),
                       phi0=d.phi0.build(g, self.seed + 1), v0=d.v0.build(g, self.seed + 2),
                       forcing=forcing, T=self.scheme.T, dt=self.scheme.dt,
                       scheme=self.scheme.name, tol=self.scheme.tol)


def parse_config(text: str) -> Config:
    """Parse JSON text; syntax errors report line and column."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if isinstance(raw, dict) and "config" in raw and "code_version" in raw:
        raw = raw["config"]  # a run manifest
    return Config.from_dict(raw)


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        err = ConfigError(f"{path}: {exc}")
        err.path = exc.path
        raise err from exc
