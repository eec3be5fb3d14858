"""Run and sweep orchestration with deterministic on-disk artifacts.

Every file is written by exactly one call here. JSON uses sorted keys and no
timestamps; CSV values use 17 significant digits, so rerunning a manifest
reproduces the same bytes.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import cauchy_rates, limit_compare, sweep
from .config import Config
from .diagnostics import apriori_monitor, energy_ledger, mean_laws, weak_residual
from .integrate import IntegrationFailure, Trajectory, integrate

__all__ = [
    "RunOutcome",
    "write_json",
    "write_csv",
    "trajectory_table",
    "manifest",
    "run_single",
    "run_sweep",
]

log = logging.getLogger(__name__)

FIELDS = ("theta", "phi", "w", "mu")


def _clean(obj):
    # NaN/inf are not valid JSON; map them to null
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n")


def write_csv(path, header, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def trajectory_table(traj: Trajectory):
    """Header and rows: time, then n_cells columns for each of theta, phi, w, mu."""
    n = traj.n_cells
    header = ["t"] + [f"{name}_{i}" for name in FIELDS for i in range(n)]
    rows = np.hstack([traj.t[:, None]] + [traj.field(name) for name in FIELDS])
    return header, rows


def _columns_csv(path, cols: dict):
    write_csv(path, list(cols), np.column_stack(list(cols.values())))


def manifest(cfg: Config, command: str, artifacts) -> dict:
    return {
        "code_version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "seeds": {"seed": cfg.seed, "theta0": cfg.seed, "phi0": cfg.seed + 1,
                  "v0": cfg.seed + 2},
        "artifacts": sorted(artifacts),
        "note": "initial data and forcing are synthetic presets",
    }


@dataclass
class RunOutcome:
    ok: bool
    directory: Path
    report: dict
    message: str = ""


def _finish(cfg, out, command, written):
    write_json(out / "manifest.json", manifest(cfg, command, written))


def _write_trajectory(out, traj, written):
    header, rows = trajectory_table(traj)
    write_csv(out / "trajectory.csv", header, rows)
    written.append("trajectory.csv")


def run_single(cfg: Config, directory) -> RunOutcome:
    """Integrate one configuration and write its artifacts into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.build_params()
    problem = cfg.problem()
    system = problem.system(params)
    written = []
    try:
        traj = integrate(system, problem.T, problem.dt, scheme=problem.scheme,
                         save_every=cfg.scheme.save_every, tol=problem.tol)
    except IntegrationFailure as exc:
        _write_trajectory(out, exc.partial, written)
        failure = {"error": str(exc), "last_time": float(exc.partial.t[-1]),
                   "samples": len(exc.partial)}
        write_json(out / "failure.json", failure)
        written.append("failure.json")
        _finish(cfg, out, "run", written)
        return RunOutcome(False, out, failure, str(exc))

    data = system.data
    _write_trajectory(out, traj, written)
    report = {"solver": "limit" if params.tau == 0 else "inertial",
              "samples": len(traj), "dt": traj.dt, "scheme": traj.scheme,
              "stats": traj.stats, "apriori": apriori_monitor(traj).as_dict()}
    if params.tau > 0:
        ml = mean_laws(traj, data)
        _columns_csv(out / "mean_laws.csv", {"t": ml.t, "defect_phi": ml.defect_phi,
                                             "defect_phi_t": ml.defect_phi_t,
                                             "mean_yosida_w": ml.mean_yosida_w})
        el = energy_ledger(traj, data)
        _columns_csv(out / "energy_ledger.csv", el.columns())
        written += ["mean_laws.csv", "energy_ledger.csv"]
        report["mean_laws"] = ml.summary()
        report["energy"] = el.summary()
    else:
        drift = np.abs(traj.phi.mean(axis=1) - data.m_phi0)
        report["mean_conservation"] = {"sup_drift": float(drift.max())}
    if len(traj) >= 3:
        wr = weak_residual(traj, data)
        _columns_csv(out / "weak_residual.csv", {"t": wr.t, "eq1": wr.eq1, "eq2": wr.eq2,
                                                 "eq3": wr.eq3,
                                                 "eq2_quadrature": wr.eq2_quadrature})
        written.append("weak_residual.csv")
        report["weak_residual"] = wr.summary()
    write_json(out / "report.json", report)
    written.append("report.json")
    _finish(cfg, out, "run", written)
    return RunOutcome(True, out, report)


def run_sweep(cfg: Config, directory, workers=None) -> RunOutcome:
    """Run the configured sweep and write distance CSV and report JSON."""
    if cfg.sweep is None:
        raise ValueError("config has no 'sweep' section")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.sweep.build(cfg.build_params())
    problem = cfg.problem()
    result = sweep(spec, problem, workers=workers or cfg.outputs.workers)
    values, trajs = result.succeeded
    report = {"param": spec.param, "values": list(spec.values), "norm": spec.norm,
              "failures": {repr(k): v for k, v in result.failures.items()},
              "points": [{"value": v, "apriori": apriori_monitor(tr).as_dict(),
                          "dt": tr.dt, "stats": tr.stats} for v, tr in zip(values, trajs)]}
    written = []
    conv = None
    if spec.param == "tau" and values and values[-1] == 0.0 and len(trajs) >= 2:
        conv = limit_compare(trajs[:-1], trajs[-1], spec.norm, taus=values[:-1])
    elif len(trajs) >= 3:
        conv = cauchy_rates(trajs, spec.norm, values=values, param=spec.param)
    if conv is not None:
        report["convergence"] = conv.to_dict()
        if conv.distances:
            write_csv(out / "sweep_distances.csv", ["value", "next_value", "distance", "order"],
                      conv.rows())
            written.append("sweep_distances.csv")
        if conv.direct_errors is not None:
            write_csv(out / "limit_errors.csv", ["tau", "direct_error", "indicator"],
                      np.column_stack([values[:-1], conv.direct_errors, conv.indicator]))
            written.append("limit_errors.csv")
    write_json(out / "sweep_report.json", report)
    written.append("sweep_report.json")
    _finish(cfg, out, "sweep", written)
    ok = not result.failures
    return RunOutcome(ok, out, report, "" if ok else f"{len(result.failures)} sweep point(s) failed")
