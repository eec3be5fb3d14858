"""Cauchy distances for the lambda, eps, eta and tau limits.

Usage::

    python3 scripts/limit_sweeps.py                    # prescribed values 2^-1..2^-5
    python3 scripts/limit_sweeps.py --levels 10        # longer sweeps, 2^-1..2^-10
    python3 scripts/limit_sweeps.py --param lambda --n-cells 128
"""
import argparse
import json

from inertial_phasefield.asymptotics import SweepSpec, cauchy_rates, limit_compare, sweep
from inertial_phasefield.config import Config
from inertial_phasefield.diagnostics import UNIFORM_QUANTITIES, apriori_monitor
from inertial_phasefield.verify import _problem


def run(param, levels, n_cells, T, dt, workers):
    cfg = Config()
    problem = _problem(cfg, n_cells=n_cells, T=T, dt=dt)
    values = [2.0**-k for k in range(1, levels + 1)]
    if param == "tau":
        # one extra level, then the limit solver
        values += [2.0**-(levels + 1), 0.0]
    res = sweep(SweepSpec(param, tuple(values), base=cfg.build_params()), problem, workers)
    vals, trajs = res.succeeded
    if param == "tau":
        rep = limit_compare(trajs[:-1], trajs[-1], taus=vals[:-1])
    else:
        rep = cauchy_rates(trajs, values=vals, param=param)
    out = rep.to_dict()
    monitors = [apriori_monitor(tr).uniform_entries() for tr in trajs]
    out["apriori_spread"] = {
        k: max(m[k] for m in monitors) / max(min(m[k] for m in monitors), 1e-300)
        for k in UNIFORM_QUANTITIES
    }
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--param", choices=["lambda", "eps", "eta", "tau"], action="append")
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--n-cells", type=int, default=64)
    ap.add_argument("--T", type=float, default=0.25)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", help="write the full reports to this file")
    args = ap.parse_args()

    reports = {}
    for param in args.param or ["lambda", "eps", "eta", "tau"]:
        rep = run(param, args.levels, args.n_cells, args.T, args.dt, args.workers)
        reports[param] = rep
        print(f"{param}: monotone={rep['monotone']}")
        print("  distances " + " ".join(f"{d:.3e}" for d in rep["distances"]))
        if rep["direct_errors"] is not None:
            print("  errors    " + " ".join(f"{d:.3e}" for d in rep["direct_errors"]))
        print("  orders    " + " ".join(f"{o:.2f}" for o in rep["orders"]))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2, default=float)


if __name__ == "__main__":
    main()
