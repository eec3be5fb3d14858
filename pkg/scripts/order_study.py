"""Observed time-step orders of the mean-law defect, energy residual and weak residuals.

Usage::

    python3 scripts/order_study.py --scheme picard_midpoint --dts 0.02 0.01 0.005 0.0025
"""
import argparse

import numpy as np

from inertial_phasefield.config import Config
from inertial_phasefield.diagnostics import energy_ledger, mean_laws, weak_residual
from inertial_phasefield.integrate import SCHEMES, integrate
from inertial_phasefield.verify import observed_orders


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scheme", choices=SCHEMES, default="picard_midpoint")
    ap.add_argument("--dts", type=float, nargs="+", default=[0.02, 0.01, 0.005, 0.0025])
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--n-cells", type=int, default=64)
    args = ap.parse_args()

    cfg = Config()
    cfg = cfg.replace(geometry=type(cfg.geometry)(args.n_cells, cfg.geometry.length))
    params = cfg.build_params()
    rows = {"mean_law": [], "energy": [], "eq1": [], "eq2": [], "eq3": []}
    for dt in args.dts:
        problem = cfg.problem()
        system = problem.system(params)
        tr = integrate(system, args.T, dt, scheme=args.scheme)
        rows["mean_law"].append(mean_laws(tr, system.data).sup_defect)
        rows["energy"].append(float(np.abs(energy_ledger(tr, system.data).residual).max()))
        wr = weak_residual(tr, system.data)
        for k in ("eq1", "eq2", "eq3"):
            rows[k].append(float(getattr(wr, k).max()))

    print("dt        " + " ".join(f"{dt:>10.4g}" for dt in args.dts))
    for name, errs in rows.items():
        print(f"{name:<9} " + " ".join(f"{e:>10.3e}" for e in errs))
        print(f"{'  order':<9} " + " " * 11 + " ".join(f"{o:>10.3f}" for o in observed_orders(errs)))


if __name__ == "__main__":
    main()
