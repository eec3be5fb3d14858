"""Compare the integrators with the matrix-exponential solution of the linear toy.

With beta(r) = r and pi = 0 the system is affine and solved exactly by
``expm``; this prints the sup-in-time H error of phi for each tau and scheme.

Usage::

    python3 scripts/linear_toy_oracle.py --n-cells 16 --T 0.25 --dt 2.5e-4
"""
import argparse

import numpy as np

from inertial_phasefield.data_prep import Forcing
from inertial_phasefield.grid import Grid
from inertial_phasefield.integrate import integrate
from inertial_phasefield.linear_toy import toy_solution
from inertial_phasefield.scalar_ops import linear, zero
from inertial_phasefield.system import Params, System, prepare_initial_data


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=16)
    ap.add_argument("--T", type=float, default=0.25)
    ap.add_argument("--dt", type=float, default=2.5e-4)
    ap.add_argument("--taus", type=float, nargs="+", default=[0.5, 0.125, 2.0**-6, 0.0])
    args = ap.parse_args()

    g = Grid(args.n_cells)
    x = g.centers
    raw = dict(theta0=0.1 * np.cos(np.pi * x), phi0=0.3 + 0.4 * np.cos(2 * np.pi * x),
               v0=0.1 * np.cos(np.pi * x), forcing=Forcing.static(0.5 * np.cos(np.pi * x)))
    print(f"{'tau':>9} {'scheme':>16} {'sup_t |phi - exact|_H':>22}")
    for tau in args.taus:
        p = Params(tau=tau, beta=linear(), pi=zero())
        data = prepare_initial_data(g, p.eps, **raw)
        for scheme in ("rk4", "picard_midpoint"):
            tr = integrate(System(g, p, data), args.T, args.dt, scheme=scheme)
            exact = toy_solution(args.n_cells, p, data, tr.t)
            err = g.norm_h(tr.phi - exact[:, 1]).max()
            print(f"{tau:>9.4g} {scheme:>16} {err:>22.3e}")


if __name__ == "__main__":
    main()
