"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 validation error (bad input,
saturation, out-of-range), 4 runtime abort.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_scenario, schema_help
from .errors import ConfigError, CyclotactorError, SimulationAbort
from .landscape import (SyntheticLandscapeParams, generate_synthetic, invert_current,
                        load_landscape, mpsr_with_distance, save_landscape, save_zero_curve,
                        zero_force_curve)
from .sim import read_trace, simulate

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3, 4


def num(x: float) -> str:
    return f"{x:#.6g}"


def cmd_landscape(args) -> int:
    if args.action == "gen":
        p = SyntheticLandscapeParams(a=args.a, b=args.b, d0=args.d0, d_step=args.d_step,
                                     i_start=args.i_min, i_stop=args.i_max, i_step=args.i_step,
                                     noise_sigma=args.noise, seed=args.seed)
        save_landscape(generate_synthetic(p), args.out)
        return EXIT_OK
    grid = load_landscape(args.grid)
    if args.action == "zero":
        save_zero_curve(zero_force_curve(grid), args.out)
    elif args.action == "invert":
        print(num(invert_current(grid, args.distance_mm, args.force_n)))
    elif args.action == "mpsr":
        print(num(mpsr_with_distance(grid, args.dmin_mm, args.dmax_mm)[0]))
    return EXIT_OK


def _run_one(scenario_path: str, out: str | None) -> tuple[str, str]:
    loaded = load_scenario(scenario_path)
    target = Path(out) if out else loaded.output
    if target is None:
        p = Path(scenario_path)
        target = p.with_name(p.stem + ".trace.csv")
    trace = simulate(loaded.scenario)
    trace.write(target)
    return str(target), trace.summary_text()


def cmd_simulate(args) -> int:
    paths = args.scenario
    if args.out and len(paths) > 1:
        raise ConfigError(["--out needs exactly one --scenario; set [run] output instead"])
    if len(paths) == 1 or args.jobs <= 1:
        results = [_run_one(p, args.out) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, paths, [None] * len(paths)))
    for scenario_path, (target, summary) in zip(paths, results):
        if len(paths) > 1:
            print(f"# {scenario_path} -> {target}")
        sys.stdout.write(summary)
    return EXIT_OK


def latency_table(summary: dict) -> str:
    """Per-event latency accounting from a trace summary."""
    contact_by_onset = {}
    i = 0
    while f"prediction.{i}.intended_onset_ms" in summary:
        contact_by_onset[summary[f"prediction.{i}.intended_onset_ms"]] = \
            summary[f"prediction.{i}.contact_ms"]
        i += 1
    header = ("channel", "predicted_onset_ms", "physical_onset_ms", "contact_ms",
              "error_ms", "lateness")
    rows = [header]
    n = int(summary.get("events", "0"))
    for k in range(n):
        pre = f"event.{k}."
        onset = summary[pre + "intended_onset_ms"]
        contact = contact_by_onset.get(onset, summary.get("first_contact_ms", "none"))
        phys = summary[pre + "physical_onset_ms"]
        err = "none" if contact == "none" else f"{float(phys) - float(contact):+.4f}"
        late = summary[pre + "late"]
        lateness = late if late == "ontime" else f"late +{float(summary[pre + 'deficit_ms']):.4f}"
        rows.append((summary[pre + "channel"], onset, phys, contact, err, lateness))
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
                     for r in rows) + "\n"


def cmd_report(args) -> int:
    if args.kind == "latency":
        if not args.trace:
            raise ConfigError(["report latency needs --trace"])
        sys.stdout.write(latency_table(read_trace(args.trace).summary))
    else:
        if not args.grid:
            raise ConfigError(["report mpsr needs --grid"])
        value, where = mpsr_with_distance(load_landscape(args.grid), args.dmin_mm, args.dmax_mm)
        print(f"mpsr={value:.6f} at d_mm={where:.1f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyclotactor",
                                 description="Haptic landscape tools and plant simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    land = sub.add_parser("landscape", help="generate, invert and analyse force landscapes")
    lsub = land.add_subparsers(dest="action", required=True)
    gen = lsub.add_parser("gen", help="write a synthetic landscape grid")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--a", type=float, default=100.0, help="coil coupling [100]")
    gen.add_argument("--b", type=float, default=5000.0, help="residual magnetization [5000]")
    gen.add_argument("--d0", type=float, default=5.0, help="geometric offset, mm [5]")
    gen.add_argument("--noise", type=float, default=0.0, help="per-cell noise sigma, N [0]")
    gen.add_argument("--d-step", type=float, default=0.5, help="distance step, mm [0.5]")
    gen.add_argument("--i-min", type=float, default=-2.0, help="lowest current, A [-2]")
    gen.add_argument("--i-max", type=float, default=2.0, help="highest current, A [2]")
    gen.add_argument("--i-step", type=float, default=0.1, help="current step, A [0.1]")
    zero = lsub.add_parser("zero", help="write the zero-force current curve")
    zero.add_argument("--grid", required=True)
    zero.add_argument("--out", required=True)
    inv = lsub.add_parser("invert", help="print the current giving a force at a distance")
    inv.add_argument("--grid", required=True)
    inv.add_argument("--distance-mm", type=float, required=True)
    inv.add_argument("--force-n", type=float, required=True)
    mp = lsub.add_parser("mpsr", help="print the maximum practicable static rejection")
    mp.add_argument("--grid", required=True)
    mp.add_argument("--dmin-mm", type=float, default=1.0)
    mp.add_argument("--dmax-mm", type=float, default=35.0)
    land.set_defaults(func=cmd_landscape)

    sim = sub.add_parser("simulate", help="run scenario files",
                         formatter_class=argparse.RawDescriptionHelpFormatter,
                         epilog=schema_help())
    sim.add_argument("--scenario", action="append", required=True,
                     help="scenario file (repeatable)")
    sim.add_argument("--out", help="trace output path (single scenario only)")
    sim.add_argument("--jobs", type=int, default=1, help="parallel engines [1]")
    sim.set_defaults(func=cmd_simulate)

    rep = sub.add_parser("report", help="latency or MPSR reports")
    rep.add_argument("kind", choices=("latency", "mpsr"))
    rep.add_argument("--trace")
    rep.add_argument("--grid")
    rep.add_argument("--dmin-mm", type=float, default=1.0)
    rep.add_argument("--dmax-mm", type=float, default=35.0)
    rep.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationAbort as exc:
        print(f"error: simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CyclotactorError, FileNotFoundError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
