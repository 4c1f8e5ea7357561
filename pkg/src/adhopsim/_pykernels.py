"""Numpy implementations of the geometry kernels (fallback when Cython is unavailable)."""
from __future__ import annotations

import numpy as np


def advance(x, y, vx, vy, alive, dt, width, height):
    live = alive.astype(bool)
    nx = x + vx * dt
    ny = y + vy * dt

    under = live & (nx < 0.0)
    over = live & ~under & (nx > width)
    nx[under] = -nx[under]
    nx[over] = 2.0 * width - nx[over]
    vx[under | over] = -vx[under | over]

    under = live & (ny < 0.0)
    over = live & ~under & (ny > height)
    ny[under] = -ny[under]
    ny[over] = 2.0 * height - ny[over]
    vy[under | over] = -vy[under | over]

    x[live] = np.minimum(np.maximum(nx[live], 0.0), width)
    y[live] = np.minimum(np.maximum(ny[live], 0.0), height)


def in_range(x, y, alive, i, r2):
    dx = x - x[i]
    dy = y - y[i]
    mask = (dx * dx + dy * dy <= r2) & alive.astype(bool)
    mask[i] = False
    return np.flatnonzero(mask).tolist()


def mean_degree(x, y, alive, r2):
    live = alive.astype(bool)
    n = int(live.sum())
    if n == 0:
        return 0.0
    px = x[live]
    py = y[live]
    dx = px[:, None] - px[None, :]
    dy = py[:, None] - py[None, :]
    adj = dx * dx + dy * dy <= r2
    pairs = (int(adj.sum()) - n) // 2
    return 2.0 * pairs / n
