"""Mass mobility: straight-line motion with random heading and speed changes.

Every node keeps its heading and speed until its direction-change timer fires
(exponential, mean ``turn_interval``); the heading is then perturbed by a
normal deviate and the speed redrawn from (0, v_max]. Nodes reflect off the
area borders. Dead nodes freeze.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from adhopsim import kernels


@dataclass
class MobilityParams:
    width: float = 1200.0
    height: float = 1200.0
    v_max: float = 5.0
    turn_interval: float = 3.0
    turn_stddev: float = math.radians(30.0)


class Mobility:
    def __init__(self, params: MobilityParams, x, y, rng: random.Random):
        self.params = params
        self.rng = rng
        n = len(x)
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.vx = np.zeros(n)
        self.vy = np.zeros(n)
        self.heading = np.zeros(n)
        self.next_turn = np.zeros(n)
        for i in range(n):
            self.heading[i] = rng.uniform(-math.pi, math.pi)
            self._set_speed(i, self._draw_speed())
            self.next_turn[i] = rng.expovariate(1.0 / params.turn_interval)

    def _draw_speed(self) -> float:
        return self.params.v_max * (1.0 - self.rng.random())

    def _set_speed(self, i: int, speed: float) -> None:
        self.vx[i] = speed * math.cos(self.heading[i])
        self.vy[i] = speed * math.sin(self.heading[i])

    def step(self, now: float, dt: float, alive) -> None:
        p = self.params
        if p.v_max <= 0:
            return
        kernels.advance(self.x, self.y, self.vx, self.vy, alive, dt, p.width, p.height)
        for i in np.flatnonzero(self.next_turn <= now).tolist():
            if not alive[i]:
                continue
            current = math.atan2(self.vy[i], self.vx[i])
            self.heading[i] = current + self.rng.gauss(0.0, p.turn_stddev)
            self._set_speed(i, self._draw_speed())
            while self.next_turn[i] <= now:
                self.next_turn[i] += self.rng.expovariate(1.0 / p.turn_interval)


def mobility_step(x: float, y: float, heading: float, speed: float, dt: float,
                  width: float, height: float) -> tuple[float, float, float]:
    """Move one node for ``dt`` seconds; returns the new position and heading."""
    xs = np.array([x])
    ys = np.array([y])
    vx = np.array([speed * math.cos(heading)])
    vy = np.array([speed * math.sin(heading)])
    kernels.advance(xs, ys, vx, vy, np.ones(1, dtype=np.uint8), dt, width, height)
    new_heading = math.atan2(vy[0], vx[0]) if speed > 0 else heading
    return float(xs[0]), float(ys[0]), new_heading
