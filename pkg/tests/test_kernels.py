import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adhopsim import _pykernels as py
from adhopsim import kernels

try:
    from adhopsim import _ckernels as cy
except ImportError:  # extension not built
    cy = None

needs_cython = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def brute_in_range(x, y, alive, i, r2):
    return [j for j in range(len(x)) if j != i and alive[j] and (x[j] - x[i]) ** 2 + (y[j] - y[i]) ** 2 <= r2]


def brute_degree(x, y, alive, r2):
    live = [i for i in range(len(x)) if alive[i]]
    if not live:
        return 0.0
    return sum(len(brute_in_range(x, y, alive, i, r2)) for i in live) / len(live)


def layout(seed, n=60):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1200, n)
    y = rng.uniform(0, 1200, n)
    alive = (rng.random(n) > 0.2).astype(np.uint8)
    return x, y, alive


@pytest.mark.parametrize("impl", [py, pytest.param(cy, marks=needs_cython)], ids=["python", "cython"])
def test_in_range_and_degree_match_brute_force(impl):
    r2 = 176.8**2
    for seed in range(20):
        x, y, alive = layout(seed)
        for i in range(0, 60, 7):
            assert impl.in_range(x, y, alive, i, r2) == brute_in_range(x, y, alive, i, r2)
        assert impl.mean_degree(x, y, alive, r2) == pytest.approx(brute_degree(x, y, alive, r2), rel=1e-12)


@needs_cython
@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 5.0))
def test_backends_bit_identical(seed, dt):
    rng = np.random.default_rng(seed)
    n = 50
    state = [rng.uniform(0, 1200, n), rng.uniform(0, 1200, n), rng.uniform(-5, 5, n), rng.uniform(-5, 5, n)]
    alive = (rng.random(n) > 0.1).astype(np.uint8)
    a = [s.copy() for s in state]
    b = [s.copy() for s in state]
    for _ in range(30):
        py.advance(*a, alive, dt * 40, 1200.0, 1200.0)
        cy.advance(*b, alive, dt * 40, 1200.0, 1200.0)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)
    r2 = 176.8**2
    assert py.mean_degree(a[0], a[1], alive, r2) == cy.mean_degree(b[0], b[1], alive, r2)
    assert py.in_range(a[0], a[1], alive, 0, r2) == cy.in_range(b[0], b[1], alive, 0, r2)


@pytest.mark.parametrize("impl", [py, pytest.param(cy, marks=needs_cython)], ids=["python", "cython"])
def test_advance_kinematics_and_reflection(impl):
    x, y = np.array([10.0, 1199.0, 5.0]), np.array([10.0, 600.0, 5.0])
    vx, vy = np.array([5.0, 5.0, 5.0]), np.array([0.0, 0.0, 0.0])
    alive = np.array([1, 1, 0], dtype=np.uint8)
    impl.advance(x, y, vx, vy, alive, 0.1, 1200.0, 1200.0)
    assert x[0] == pytest.approx(10.5)
    impl.advance(x, y, vx, vy, alive, 0.4, 1200.0, 1200.0)
    assert x[1] == pytest.approx(1200.0 - 1.5) and vx[1] == -5.0
    assert x[2] == 5.0  # dead nodes freeze


def test_pure_python_switch(monkeypatch):
    monkeypatch.setenv("ADHOPSIM_PURE_PYTHON", "1")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("ADHOPSIM_PURE_PYTHON")
        importlib.reload(kernels)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1200), st.floats(0, 1200), st.floats(-math.pi, math.pi), st.floats(0, 5), st.floats(0, 10))
def test_positions_stay_inside(x, y, heading, speed, dt):
    from adhopsim.mobility import mobility_step

    nx, ny, _ = mobility_step(x, y, heading, speed, dt, 1200.0, 1200.0)
    assert 0 <= nx <= 1200 and 0 <= ny <= 1200
