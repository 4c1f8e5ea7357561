import math

import pytest
from hypothesis import given, strategies as st

from adhopsim.energy import battery_energy_joules
from adhopsim.heuristics import (
    EPSILON,
    LifetimeEstimator,
    battery_charge_h,
    dequantize,
    discharge_rate,
    estimated_lifetime,
    lifetime_h,
    node_heuristic,
    phi_eff,
    quantize,
    rho_eff,
)

REL = 1e-9


def test_battery_charge_examples():
    assert battery_charge_h(32.4, 32.4) == 1.0
    assert battery_charge_h(4.5, 9.0) == pytest.approx(0.5, rel=REL)
    assert battery_charge_h(0.0, 9.0) == EPSILON


def test_discharge_rate_examples():
    assert discharge_rate(32.4, 29.16, 300) == pytest.approx(0.0108, rel=REL)
    assert discharge_rate(32.4, 32.4, 300) == 0
    assert discharge_rate(32.4, 30.0, 0) is None


def test_estimated_lifetime_examples():
    assert estimated_lifetime(16.2, 0.0108) == pytest.approx(1500, rel=REL)
    assert math.isinf(estimated_lifetime(16.2, 0.0))
    assert estimated_lifetime(0.0, 0.01) == 0


def test_lifetime_h_examples():
    assert lifetime_h(450, 900, 300) == pytest.approx(0.75, rel=REL)
    assert lifetime_h(600, 900, 300) == 1.0
    assert lifetime_h(math.inf, 900, 300) == 1.0
    assert lifetime_h(10, 900, 900) == 1.0
    assert lifetime_h(0.0, 900, 0) == EPSILON


def test_modulation_examples():
    assert phi_eff(1.0, 0.5) == 0.5
    assert rho_eff(1.0, 0.1, 0.5) == pytest.approx(0.05, rel=REL)
    assert phi_eff(EPSILON, 0.5) < 1e-4
    assert rho_eff(EPSILON, 0.1, 0.5) == pytest.approx(0.1, rel=1e-4)
    assert rho_eff(1.0, 0.1, 0.0) == 0.1


@given(st.floats(EPSILON, 1.0), st.floats(EPSILON, 1.0))
def test_modulation_monotone(h1, h2):
    lo, hi = min(h1, h2), max(h1, h2)
    if hi - lo < 1e-12:  # below double resolution of 1 - kappa*h
        return
    assert phi_eff(lo, 0.5) < phi_eff(hi, 0.5)
    assert rho_eff(lo, 0.1, 0.5) > rho_eff(hi, 0.1, 0.5)


@given(st.floats(EPSILON, 1.0))
def test_quantization_error(h):
    raw = quantize(h)
    assert 1 <= raw <= 65535
    assert abs(h - dequantize(raw)) <= 1 / 65535


def test_dequantize_rejects_zero():
    with pytest.raises(ValueError):
        dequantize(0)


def test_heterogeneous_batteries():
    # 1000 mAh at 30 % vs 200 mAh at 50 %: charge ranks the small battery higher
    p0, q0 = battery_energy_joules(1000, 3), battery_energy_joules(200, 3)
    p, q = 0.3 * p0, 0.5 * q0
    assert battery_charge_h(p, p0) < battery_charge_h(q, q0)
    # equal discharge rates: lifetime ranks by absolute remaining runtime
    rate, target, t = 1.0, 10_000.0, 100.0
    hp = lifetime_h(estimated_lifetime(p, rate), target, t)
    hq = lifetime_h(estimated_lifetime(q, rate), target, t)
    assert hp > hq


def test_lifetime_estimator():
    est = LifetimeEstimator(32.4, 900.0)
    assert est.h(32.4, 0.0) == 1.0
    # D = 0.0108, L = 2.7/0.0108 = 250 s, horizon 600 s
    assert est.h(32.4 - 3.24, 300.0) == 1.0
    assert est.h(2.7 + 0, 300.0) == pytest.approx(min(1, (2.7 / ((32.4 - 2.7) / 300)) / 600), rel=REL)
    assert node_heuristic("none", 0, 1, 0) == 1.0
    with pytest.raises(ValueError):
        node_heuristic("lifetime", 1, 1, 1)
