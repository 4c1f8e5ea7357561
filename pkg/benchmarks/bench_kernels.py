"""Compare the compiled and numpy geometry kernels, then time a whole run on each.

    python benchmarks/bench_kernels.py [--nodes 140] [--repeat 2000]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from adhopsim import _pykernels

try:
    from adhopsim import _ckernels
except ImportError:
    _ckernels = None


def kernel_times(impl, n: int, repeat: int) -> dict[str, float]:
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 1200, n), rng.uniform(0, 1200, n)
    vx, vy = rng.uniform(-5, 5, n), rng.uniform(-5, 5, n)
    alive = np.ones(n, dtype=np.uint8)
    r2 = 176.8**2
    calls = {
        "in_range": lambda: impl.in_range(x, y, alive, 7, r2),
        "advance": lambda: impl.advance(x, y, vx, vy, alive, 0.5, 1200.0, 1200.0),
        "mean_degree": lambda: impl.mean_degree(x, y, alive, r2),
    }
    return {name: min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat * 1e6 for name, fn in calls.items()}


def run_time(pure: bool, duration: float) -> float:
    env = dict(os.environ)
    if pure:
        env["ADHOPSIM_PURE_PYTHON"] = "1"
    else:
        env.pop("ADHOPSIM_PURE_PYTHON", None)
    code = ("import time;from adhopsim.config import Scenario;from adhopsim.sim import Simulation;"
            f"t=time.perf_counter();Simulation(Scenario(duration_s={duration})).run();"
            "print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=140)
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--duration", type=float, default=60.0)
    args = ap.parse_args()

    py = kernel_times(_pykernels, args.nodes, args.repeat)
    cy = kernel_times(_ckernels, args.nodes, args.repeat) if _ckernels else None
    print(f"kernel call cost, {args.nodes} nodes (microseconds per call)")
    print(f"{'kernel':12s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, t in py.items():
        if cy:
            print(f"{name:12s} {t:10.2f} {cy[name]:10.2f} {t / cy[name]:8.1f}x")
        else:
            print(f"{name:12s} {t:10.2f} {'n/a':>10s}")

    print(f"\nwhole run, default scenario, {args.duration:g} s simulated")
    t_py = run_time(True, args.duration)
    print(f"numpy kernels  {t_py:8.2f} s")
    if _ckernels:
        t_cy = run_time(False, args.duration)
        print(f"cython kernels {t_cy:8.2f} s  ({t_py / t_cy:.2f}x)")


if __name__ == "__main__":
    main()
