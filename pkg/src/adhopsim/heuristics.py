"""Energy heuristics carried in the ant ``Heuristic Inf.`` field.

Two heuristics are provided: the battery state of charge (EA-ADHOP-B) and the
estimated lifetime normalised by the time left to a target lifetime
(EA-ADHOP-L). Both produce a value in (0, 1] that scales the pheromone deposit
and evaporation coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

H_RAW_MAX = 0xFFFF
EPSILON = 1.0 / H_RAW_MAX
"""Smallest representable heuristic value; zero is outside the valid range."""

HEURISTICS = ("none", "battery", "lifetime")


def clamp_h(h: float) -> float:
    return min(1.0, max(EPSILON, h))


def quantize(h: float) -> int:
    """Map ``h`` in (0, 1] to the 16-bit wire value (raw >= 1)."""
    return max(1, min(H_RAW_MAX, round(h * H_RAW_MAX)))


def dequantize(raw: int) -> float:
    if not 1 <= raw <= H_RAW_MAX:
        raise ValueError(f"heuristic raw value {raw} outside [1, {H_RAW_MAX}]")
    return raw / H_RAW_MAX


def battery_charge_h(b_now: float, e_batt_0: float) -> float:
    """State of charge, clamped away from zero."""
    if e_batt_0 <= 0:
        raise ValueError("initial battery energy must be positive")
    return clamp_h(b_now / e_batt_0)


def discharge_rate(e_batt_0: float, e_batt_i: float, t_i: float) -> float | None:
    """Average discharge rate since t = 0 in J/s, or None before any time has elapsed."""
    if t_i <= 0:
        return None
    return (e_batt_0 - e_batt_i) / t_i


def estimated_lifetime(b_i: float, d_i: float) -> float:
    """Remaining runtime in seconds; ``inf`` when nothing is being consumed."""
    if b_i <= 0:
        return 0.0
    if d_i <= 0:
        return math.inf
    return b_i / d_i


def lifetime_h(lifetime: float, l_target: float, t_now: float) -> float:
    if l_target <= 0:
        raise ValueError("target lifetime must be positive")
    remaining = l_target - t_now
    if remaining <= 0 or math.isinf(lifetime):
        return 1.0
    return clamp_h(min(1.0, lifetime / remaining))


def phi_eff(h: float, phi_base: float) -> float:
    return phi_base * h


def rho_eff(h: float, rho_base: float, kappa: float) -> float:
    return rho_base * (1.0 - kappa * h)


@dataclass
class LifetimeEstimator:
    """Per-node state for the lifetime heuristic (cumulative-average discharge)."""

    e_batt_0: float
    l_target: float

    def h(self, b_now: float, t_now: float) -> float:
        rate = discharge_rate(self.e_batt_0, b_now, t_now)
        if rate is None:
            return 1.0
        return lifetime_h(estimated_lifetime(b_now, rate), self.l_target, t_now)


def node_heuristic(kind: str, b_now: float, e_batt_0: float, t_now: float,
                   estimator: LifetimeEstimator | None = None) -> float:
    if kind == "none":
        return 1.0
    if kind == "battery":
        return battery_charge_h(b_now, e_batt_0)
    if kind == "lifetime":
        if estimator is None:
            raise ValueError("lifetime heuristic needs an estimator")
        return estimator.h(b_now, t_now)
    raise ValueError(f"unknown heuristic {kind!r}")
