import hashlib
import math

import pytest

from adhopsim import cli
from adhopsim.config import Scenario
from adhopsim.harness import SweepError, SweepSpec, load_sweep, run_sweep, summarize, write_csvs, write_report
from adhopsim.metrics import ROW_FIELDS, MetricsReport, delivery_ratio, energy_stats, routing_overhead


def report(**kw):
    return MetricsReport("adhop", 10, 1, 1.0, **kw)


def test_delivery_ratio_examples():
    assert delivery_ratio(report(generated=4500, delivered=4500)) == 1.0
    assert delivery_ratio(report(generated=4500, delivered=0)) == 0.0
    assert delivery_ratio(report(generated=4500, delivered=900)) == pytest.approx(0.2, rel=1e-12)
    assert delivery_ratio(report()) == 0.0


def test_routing_overhead_examples():
    assert routing_overhead(report(control_bytes=99, useful_bytes=1)) == pytest.approx(0.99)
    assert routing_overhead(report(data_header_bytes=50, useful_bytes=32)) == pytest.approx(50 / 82)
    assert routing_overhead(report()) == 0.0


def test_energy_stats_examples():
    assert energy_stats([2.0, 2.0, 2.0])[1] == 0.0
    assert energy_stats([1.0, 3.0]) == (2.0, 1.0)
    assert energy_stats([5.0]) == (5.0, 0.0)
    with pytest.raises(ValueError):
        energy_stats([])


def small_spec(**kw):
    base = Scenario(duration_s=12.0, node_count=4, source_count=2, sink_count=2)
    return SweepSpec(protocols=("adhop", "aodvjr"), node_counts=(2, 4), seeds=(1, 2, 3), base=base, **kw)


def test_sweep_cardinality_and_determinism(tmp_path):
    spec = small_spec()
    rows = run_sweep(spec)
    assert len(rows) == 12
    assert len(summarize(rows)) == 4
    runs1, sum1 = write_csvs(rows, tmp_path / "a")
    runs2, sum2 = write_csvs(run_sweep(spec), tmp_path / "b")
    assert runs1.read_bytes() == runs2.read_bytes()
    assert sum1.read_bytes() == sum2.read_bytes()
    header = runs1.read_text().splitlines()[0].split(",")
    assert header == ROW_FIELDS
    for row in rows:
        assert int(row["delivered"]) <= int(row["generated"])


def test_parallel_matches_serial():
    spec = small_spec()
    assert run_sweep(spec, workers=2) == run_sweep(spec)


def test_sweep_failure_names_cell(monkeypatch):
    import adhopsim.harness as h

    def boom(scenario, trace=None):
        raise RuntimeError("kaput")

    monkeypatch.setattr(h, "run_scenario", boom)
    with pytest.raises(SweepError, match="protocol=adhop nodes=2 seed=1"):
        run_sweep(small_spec())


def test_spec_requires_seed():
    with pytest.raises(ValueError):
        SweepSpec(seeds=())


def test_sweep_file(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("protocols = adhop, ea-adhop-l\nnode_counts = 20 40\nseeds = 1-4\nduration_s = 30\n")
    spec = load_sweep(path)
    assert spec.protocols == ("adhop", "ea-adhop-l")
    assert spec.node_counts == (20, 40)
    assert spec.seeds == (1, 2, 3, 4)
    assert spec.base.duration_s == 30


def test_report_files(tmp_path):
    rows = run_sweep(small_spec())
    runs, _ = write_csvs(rows, tmp_path)
    files = write_report(runs, tmp_path / "plots")
    names = sorted(p.name for p in files)
    assert names == ["fig10_delivery_ratio.dat", "fig11_routing_overhead.dat", "fig8_energy_mean.dat",
                     "fig9_energy_std.dat"]
    lines = (tmp_path / "plots" / "fig10_delivery_ratio.dat").read_text().splitlines()
    assert lines[0].startswith("# nodes adhop_mean")
    assert [line.split()[0] for line in lines[1:]] == ["2", "4"]
    assert all(len(line.split()) == 5 for line in lines[1:])


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_cli_run_sweep_report(tmp_path, capsys):
    out = tmp_path / "run"
    trace = tmp_path / "trace.txt"
    assert cli.main(["run", "--protocol", "aodvjr", "--nodes", "5", "--duration", "10", "--seed", "3",
                     "--out-dir", str(out), "--trace", str(trace), "--json"]) == 0
    assert (out / "runs.csv").exists() and (out / "report.json").exists()
    assert trace.read_text().splitlines()[0].count(" ") == 2
    cfg = tmp_path / "base.cfg"
    cfg.write_text("source_count = 2\nsink_count = 2\n")
    sweep_dir = tmp_path / "sweep"
    assert cli.main(["sweep", "--config", str(cfg), "--protocol", "adhop", "--nodes", "2", "3",
                     "--seeds", "2", "--duration", "8", "--out-dir", str(sweep_dir)]) == 0
    assert len((sweep_dir / "runs.csv").read_text().splitlines()) == 5
    assert cli.main(["report", str(sweep_dir / "runs.csv"), "--out-dir", str(tmp_path / "dat")]) == 0
    assert len(list((tmp_path / "dat").glob("*.dat"))) == 4
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_determinism(tmp_path):
    digests = []
    for name in ("a", "b"):
        d = tmp_path / name
        cli.main(["run", "--nodes", "10", "--duration", "20", "--seed", "5", "--out-dir", str(d),
                  "--trace", str(d / "trace.txt")])
        digests.append((sha(d / "runs.csv"), sha(d / "trace.txt")))
    assert digests[0] == digests[1]
