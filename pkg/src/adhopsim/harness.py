"""Sweeps over protocols, node counts and seeds; CSV output and gnuplot tables.

``runs.csv`` has one row per (protocol, node_count, seed) with the columns of
:data:`adhopsim.metrics.ROW_FIELDS`. ``summary.csv`` has one row per
(protocol, node_count) with ``<metric>_mean`` and ``<metric>_std`` (sample
standard deviation across seeds) for every numeric metric.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from adhopsim.config import PROTOCOLS, ConfigError, Scenario, coerce, load_scenario, parse_pairs
from adhopsim.metrics import ROW_FIELDS, MetricsReport
from adhopsim.sim import Simulation

SUMMARY_METRICS = ("delivery_ratio", "routing_overhead", "energy_mean_j", "energy_std_j",
                   "dead_nodes", "avg_neighbors", "generated", "delivered", "total_bytes")

# figure file -> summary metric plotted against node count
FIGURES = {
    "fig8_energy_mean.dat": "energy_mean_j",
    "fig9_energy_std.dat": "energy_std_j",
    "fig10_delivery_ratio.dat": "delivery_ratio",
    "fig11_routing_overhead.dat": "routing_overhead",
}


class SweepError(RuntimeError):
    pass


@dataclass
class SweepSpec:
    protocols: tuple[str, ...] = PROTOCOLS
    node_counts: tuple[int, ...] = (20, 60, 100)
    seeds: tuple[int, ...] = tuple(range(1, 11))
    base: Scenario = field(default_factory=Scenario)

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("a sweep needs at least one seed per cell")
        if not self.protocols or not self.node_counts:
            raise ConfigError("a sweep needs at least one protocol and one node count")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ConfigError(f"unknown protocol {p!r}")

    def cells(self):
        for protocol in self.protocols:
            for n in self.node_counts:
                for seed in self.seeds:
                    yield self.base.replace(protocol=protocol, node_count=n, seed=seed)


FULL_NODE_COUNTS = tuple(range(20, 201, 20))


def _int_list(text: str) -> tuple[int, ...]:
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def load_sweep(path: str | Path, **overrides) -> SweepSpec:
    """Read a sweep file.

    Keys ``protocols``, ``node_counts`` and ``seeds`` (lists; ``seeds`` also
    accepts ranges like ``1-10``) describe the grid. Every other key is a
    scenario setting for the base scenario.
    """
    pairs = parse_pairs(Path(path).read_text())
    grid = {}
    for key in ("protocols", "node_counts", "seeds"):
        if key in pairs:
            grid[key] = pairs.pop(key)
    base = Scenario().replace(**{k: coerce(k, v) for k, v in pairs.items()})
    base = base.replace(**{k: v for k, v in overrides.items() if v is not None}).validate()
    spec = SweepSpec(base=base)
    if "protocols" in grid:
        spec.protocols = tuple(grid["protocols"].replace(",", " ").split())
    if "node_counts" in grid:
        spec.node_counts = _int_list(grid["node_counts"])
    if "seeds" in grid:
        spec.seeds = _int_list(grid["seeds"])
    spec.__post_init__()
    return spec


def run_scenario(scenario: Scenario, trace=None) -> MetricsReport:
    sim = Simulation(scenario, trace=trace)
    report = sim.run()
    check_report(sim, report)
    return report


def check_report(sim: Simulation, report: MetricsReport) -> None:
    """Conservation and attribution checks that every run must pass."""
    deducted = math.fsum(n.battery.capacity - n.battery.remaining for n in sim.nodes)
    if not math.isclose(deducted, report.energy_ticks_j, rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(f"energy not conserved: {deducted} deducted vs {report.energy_ticks_j} reported")
    parts = (report.control_bytes + report.data_header_bytes + report.useful_bytes
             + report.undelivered_payload_bytes)
    if parts != report.total_bytes:
        raise AssertionError(f"byte attribution incomplete: {parts} != {report.total_bytes}")
    if min(report.control_bytes, report.data_header_bytes, report.useful_bytes,
           report.undelivered_payload_bytes) < 0:
        raise AssertionError("negative byte counter")
    if report.delivered > report.generated:
        raise AssertionError("more deliveries than generated messages")


def _run_row(scenario: Scenario) -> dict:
    try:
        return run_scenario(scenario).to_row()
    except Exception as exc:
        raise SweepError(f"run failed for protocol={scenario.protocol} nodes={scenario.node_count} "
                         f"seed={scenario.seed}: {exc!r}") from exc


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None) -> list[dict]:
    cells = list(spec.cells())
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = []
            for row in pool.map(_run_row, cells):
                rows.append(row)
                if progress:
                    progress(row)
            return rows
    rows = []
    for scenario in cells:
        row = _run_row(scenario)
        rows.append(row)
        if progress:
            progress(row)
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple[str, int], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["protocol"], int(row["node_count"])), []).append(row)
    out = []
    for (protocol, n), members in groups.items():
        summary = {"protocol": protocol, "node_count": n, "seeds": len(members)}
        for metric in SUMMARY_METRICS:
            values = [float(r[metric]) for r in members]
            summary[f"{metric}_mean"] = round(statistics.fmean(values), 9)
            summary[f"{metric}_std"] = round(statistics.stdev(values), 9) if len(values) > 1 else 0.0
        out.append(summary)
    return out


def _csv_text(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_csvs(rows: list[dict], out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = out / "runs.csv"
    runs.write_text(_csv_text(rows, ROW_FIELDS), encoding="utf-8")
    summary_rows = summarize(rows)
    fields = ["protocol", "node_count", "seeds"]
    for metric in SUMMARY_METRICS:
        fields += [f"{metric}_mean", f"{metric}_std"]
    summary = out / "summary.csv"
    summary.write_text(_csv_text(summary_rows, fields), encoding="utf-8")
    return runs, summary


def read_rows(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_report(runs_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """One gnuplot table per figure: node count, then mean and std per protocol."""
    summary = summarize(read_rows(runs_csv))
    protocols = [p for p in PROTOCOLS if any(s["protocol"] == p for s in summary)]
    counts = sorted({s["node_count"] for s in summary})
    index = {(s["protocol"], s["node_count"]): s for s in summary}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, metric in FIGURES.items():
        header = ["# nodes"] + [f"{p}_mean {p}_std" for p in protocols]
        lines = [" ".join(header)]
        for n in counts:
            cols = [str(n)]
            for p in protocols:
                s = index.get((p, n))
                cols += ["nan", "nan"] if s is None else [f"{s[metric + '_mean']:.9g}", f"{s[metric + '_std']:.9g}"]
            lines.append(" ".join(cols))
        path = out / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written


def calibrate(base: Scenario, seeds: tuple[int, ...], low: float = 0.05, high: float = 0.15,
              lo_mah: float = 0.05, hi_mah: float = 5.0, iterations: int = 12, progress=None) -> tuple[float, float]:
    """Bisect the battery size until plain ADHOP kills about (low + high) / 2 of the nodes.

    Stops once the mean dead fraction is within a quarter of the band of the
    midpoint; otherwise returns the closest size tried. Returns
    (battery_mah, mean dead fraction). The dead fraction decreases as the
    battery grows, so bisection on capacity converges.
    """
    def dead_fraction(mah: float) -> float:
        fractions = []
        for seed in seeds:
            rep = run_scenario(base.replace(protocol="adhop", battery_mah=mah, seed=seed))
            fractions.append(rep.dead_nodes / len(rep.death_times))
        frac = statistics.fmean(fractions)
        if progress:
            progress(mah, frac)
        return frac

    target = (low + high) / 2
    best = (hi_mah, dead_fraction(hi_mah))
    for _ in range(iterations):
        mid = math.sqrt(lo_mah * hi_mah)
        frac = dead_fraction(mid)
        if abs(frac - target) < abs(best[1] - target):
            best = (mid, frac)
        if abs(frac - target) <= (high - low) / 4:
            return mid, frac
        if frac > target:
            lo_mah = mid
        else:
            hi_mah = mid
    return best


__all__ = ["SweepSpec", "SweepError", "load_sweep", "run_scenario", "run_sweep", "summarize",
           "write_csvs", "write_report", "calibrate", "FIGURES", "FULL_NODE_COUNTS", "load_scenario"]
