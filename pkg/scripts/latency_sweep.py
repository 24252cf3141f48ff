"""Onset error of prescheduled events versus approach speed.

Runs noiseless taps from 20 mm with and without input-latency compensation
and prints one row per speed.
"""

import argparse

from cyclotactor.landscape import generate_synthetic
from cyclotactor.predictor import PredictorConfig
from cyclotactor.sensing import SensorModel
from cyclotactor.sim import FingerModel, Intent, Scenario, simulate


def run(grid, speed, compensate, noise, seed):
    sc = Scenario(landscape=grid, sensor=SensorModel(noise_sigma=noise),
                  finger=FingerModel(intent=Intent("tap", 20.0, -3.0, speed)),
                  predictor=PredictorConfig(compensate_input_latency=compensate),
                  duration=20.0 / speed + 0.015, seed=seed)
    return simulate(sc).summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--speeds", type=float, nargs="+",
                    default=[100, 200, 300, 500, 750, 1000, 1500])
    ap.add_argument("--noise", type=float, default=0.0, help="sensor intensity noise sigma")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    grid = generate_synthetic()
    print(f"{'v_mm_s':>8} {'err_ms':>10} {'skew_ms':>10} {'audio':>7} {'tactile':>8} "
          f"{'uncomp_ms':>10}")
    for v in args.speeds:
        s = run(grid, v, True, args.noise, args.seed)
        raw = run(grid, v, False, args.noise, args.seed)
        late = {s.get(f"event.{i}.channel"): s.get(f"event.{i}.late") for i in range(2)}
        print(f"{v:8.0f} {s['onset_error_ms']:>10} {s['onset_skew_ms']:>10} "
              f"{late.get('audio', '-'):>7} {late.get('tactile', '-'):>8} "
              f"{raw['onset_error_ms']:>10}")


if __name__ == "__main__":
    main()
