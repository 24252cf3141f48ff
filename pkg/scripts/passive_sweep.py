"""Residual magnetic force of the passive surface versus sweep range.

For each lower sweep limit, runs a 35 mm -> d_low sweep with the
zero-force controller and with the coil off, and reports the worst
|F_mag| plus the lowest distance at which it still exceeds the bound.
"""

import argparse

import numpy as np

from cyclotactor.control import OpenLoop
from cyclotactor.landscape import generate_synthetic
from cyclotactor.sim import FingerModel, Intent, Scenario, simulate


def sweep(grid, low, speed, **kw):
    sc = Scenario(landscape=grid, finger=FingerModel(intent=Intent("sweep", 35.0, low, speed)),
                  duration=(35.0 - low) / speed + 0.01, **kw)
    tr = simulate(sc)
    return np.array(tr.column("d_true_mm")), np.abs(tr.column("F_mag_N"))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--speed", type=float, default=50.0)
    ap.add_argument("--lows", type=float, nargs="+", default=[0, 2, 4, 6, 8, 12, 20])
    ap.add_argument("--bound", type=float, default=2e-3)
    args = ap.parse_args()

    grid = generate_synthetic()
    print(f"{'d_low':>6} {'max_F_on':>10} {'max_F_off':>10} {'above_bound_at_mm':>18}")
    for low in args.lows:
        d, f = sweep(grid, low, args.speed)
        _, f_off = sweep(grid, low, args.speed, controller=OpenLoop.constant(0.0))
        over = d[f > args.bound]
        where = f"<= {over.max():.2f}" if len(over) else "never"
        print(f"{low:6.1f} {f.max():10.3g} {f_off.max():10.3g} {where:>18}")


if __name__ == "__main__":
    main()
