"""Command line: run, sweep, report, calibrate."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from adhopsim.config import PROTOCOLS, ConfigError, dump_scenario, load_scenario
from adhopsim.harness import (
    FULL_NODE_COUNTS,
    SweepError,
    calibrate,
    load_sweep,
    run_scenario,
    run_sweep,
    SweepSpec,
    write_csvs,
    write_report,
)
from adhopsim.metrics import ROW_FIELDS


def _common(p: argparse.ArgumentParser, many_nodes: bool = False) -> None:
    p.add_argument("--config", help="scenario file (key = value)")
    p.add_argument("--seed", type=int)
    if many_nodes:
        p.add_argument("--nodes", type=int, nargs="+", help="routing node counts to sweep")
    else:
        p.add_argument("--nodes", type=int, help="number of routing nodes (sources and sinks come on top)")
    p.add_argument("--duration", type=float, help="simulated seconds")
    p.add_argument("--out-dir", default=".", help="directory for output files")


def _overrides(args) -> dict:
    return {"seed": args.seed, "node_count": args.nodes, "duration_s": args.duration}


def cmd_run(args) -> int:
    over = _overrides(args)
    over["protocol"] = args.protocol
    scenario = load_scenario(args.config, **over)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        report = run_scenario(scenario, trace=trace)
    finally:
        if trace:
            trace.close()
    row = report.to_row()
    write_csvs([row], out)
    if args.json:
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    for key in ROW_FIELDS:
        print(f"{key:28s} {row[key]}")
    return 0


def cmd_sweep(args) -> int:
    over = {"duration_s": args.duration}
    if args.spec:
        spec = load_sweep(args.spec, **over)
    else:
        spec = SweepSpec(base=load_scenario(args.config, **over))
    if args.protocol:
        spec.protocols = tuple(args.protocol)
    if args.nodes:
        spec.node_counts = tuple(args.nodes)
    if args.full_grid:
        spec.node_counts = FULL_NODE_COUNTS
        spec.base = spec.base.replace(duration_s=900.0)
    if args.seeds:
        spec.seeds = tuple(range(1, args.seeds + 1))
    if args.seed is not None:
        spec.seeds = tuple(range(args.seed, args.seed + len(spec.seeds)))
    spec.__post_init__()

    def progress(row):
        print(f"{row['protocol']:11s} n={row['node_count']:<4} seed={row['seed']:<4} "
              f"pdr={row['delivery_ratio']:.3f} std={row['energy_std_j']:.4f} dead={row['dead_nodes']}",
              file=sys.stderr, flush=True)

    rows = run_sweep(spec, workers=args.workers, progress=progress)
    runs, summary = write_csvs(rows, args.out_dir)
    print(runs)
    print(summary)
    return 0


def cmd_report(args) -> int:
    for path in write_report(args.runs, args.out_dir):
        print(path)
    return 0


def cmd_calibrate(args) -> int:
    base = load_scenario(args.config, node_count=args.nodes, duration_s=args.duration)
    seeds = tuple(range(1, args.seeds + 1))

    def progress(mah, frac):
        print(f"battery {mah:.5f} mAh -> ADHOP dead fraction {frac:.3f}", file=sys.stderr, flush=True)

    mah, frac = calibrate(base, seeds, args.low, args.high, progress=progress)
    print(f"battery_mah = {mah:.6g}  # ADHOP dead fraction {frac:.3f}")
    if args.write:
        Path(args.write).write_text(dump_scenario(base.replace(battery_mah=float(f"{mah:.6g}"))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adhopsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    _common(p)
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--trace", help="write the event trace to this file")
    p.add_argument("--json", action="store_true", help="also write report.json with per-node data")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a protocol x node count x seed grid")
    _common(p, many_nodes=True)
    p.add_argument("spec", nargs="?", help="sweep file (protocols, node_counts, seeds, scenario keys)")
    p.add_argument("--protocol", action="append", choices=PROTOCOLS)
    p.add_argument("--seeds", type=int, help="number of seeds per cell")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-grid", action="store_true", help="node counts 20..200 and 900 s runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="turn runs.csv into gnuplot tables")
    p.add_argument("runs", help="runs.csv written by sweep")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("calibrate", help="size the battery so ADHOP kills a target share of nodes")
    _common(p)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--low", type=float, default=0.05)
    p.add_argument("--high", type=float, default=0.15)
    p.add_argument("--write", help="write the calibrated scenario to this file")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SweepError, OSError) as exc:
        print(f"adhopsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
