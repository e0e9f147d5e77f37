import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadfield.model import FieldReaction, ModelParams, RoadReaction
from roadfield.simulator import (FrontSeries, GridSpec, SimState, SimulationError, estimate_speed,
                                 front_position, initial_state, level_sensitivity, mass, run, stable_dt, step,
                                 supersolution_level)
from roadfield.stationary import stationary_mortality

F = FieldReaction.logistic(1.0)
SMALL = GridSpec(Lx=10.0, Ly=5.0, dx=0.5, dy=0.5, T=5.0)


def evolve(state, params, g, grid, n):
    for _ in range(n):
        state = step(state, params, F, g, grid)
    return state


def random_state(rng, grid, scale=1.0):
    return SimState(scale * rng.random(grid.nx), scale * rng.random((grid.ny, grid.nx)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 4.0), st.floats(-2.0, 2.0), st.floats(0.0, 2.0))
def test_positivity(seed, D, q, rho):
    rng = np.random.default_rng(seed)
    p = ModelParams(1.0, D, 1.0, 1.0, q)
    s = evolve(random_state(rng, SMALL), p, RoadReaction.mortality(rho), SMALL, 30)
    assert s.u.min() >= 0.0 and s.v.min() >= 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0))
def test_discrete_comparison(seed, q):
    rng = np.random.default_rng(seed)
    p = ModelParams(1.0, 2.0, 1.0, 1.0, q)
    g = RoadReaction.logistic(0.5, 1.0)
    lo = random_state(rng, SMALL, 0.5)
    hi = SimState(lo.u + rng.random(SMALL.nx), lo.v + rng.random((SMALL.ny, SMALL.nx)))
    # one dt, monotone for all values up to 6 (both data stay below their supersolution)
    dt = stable_dt(p, F, g, SMALL.dx, SMALL.dy, 6.0)
    for _ in range(30):
        lo = step(lo, p, F, g, SMALL, dt=dt)
        hi = step(hi, p, F, g, SMALL, dt=dt)
    assert np.all(lo.u <= hi.u) and np.all(lo.v <= hi.v)


def test_symmetry_without_transport():
    p = ModelParams(1.0, 3.0, 1.0, 1.0)
    s = evolve(initial_state(SMALL), p, RoadReaction.mortality(0.5), SMALL, 200)
    assert np.max(np.abs(s.u - s.u[::-1])) <= 1e-12
    assert np.max(np.abs(s.v - s.v[:, ::-1])) <= 1e-12


def test_translation_invariance():
    grid = GridSpec(Lx=20.0, Ly=5.0, dx=0.5, dy=0.5)
    p = ModelParams(1.0, 1.0, 1.0, 1.0, q=0.5)
    x = grid.x
    a = initial_state(grid, u0=lambda x: (np.abs(x + 4) <= 1).astype(float))
    b = initial_state(grid, u0=lambda x: (np.abs(x - 4) <= 1).astype(float))
    a = evolve(a, p, RoadReaction.zero(), grid, 20)
    b = evolve(b, p, RoadReaction.zero(), grid, 20)
    shift = int(round(8 / grid.dx))
    assert np.max(np.abs(a.u[:-shift] - b.u[shift:])) <= 1e-14
    assert np.max(np.abs(a.v[:, :-shift] - b.v[:, shift:])) <= 1e-14
    assert x.size == grid.nx


@pytest.mark.parametrize("g", [RoadReaction.zero(), RoadReaction.mortality(1.0), RoadReaction.logistic(2.0, 3.0)])
def test_supersolution_decays_monotonically(g):
    p = ModelParams(1.0, 2.0, 1.5, 0.7, q=1.0)
    M = supersolution_level(p, g, 0.0, 0.0)
    s = SimState(np.full(SMALL.nx, M * p.nu), np.full((SMALL.ny, SMALL.nx), M * p.mu))
    for _ in range(100):
        nxt = step(s, p, F, g, SMALL)
        assert np.all(nxt.u <= s.u) and np.all(nxt.v <= s.v)
        s = nxt


def test_kernel_matches_numpy_path():
    rng = np.random.default_rng(3)
    p = ModelParams(1.2, 2.0, 0.8, 1.1, q=-0.7)
    g = RoadReaction.logistic(0.4, 2.0)
    f_np = FieldReaction.custom(F.f, 1.0)  # no polynomial form: numpy fallback
    s = random_state(rng, SMALL)
    a = step(s, p, F, g, SMALL)
    b = step(s, p, f_np, g, SMALL, dt=a.t)
    assert np.allclose(a.u, b.u, rtol=0, atol=1e-13) and np.allclose(a.v, b.v, rtol=0, atol=1e-13)


def test_robin_row_is_flux_balanced():
    # uniform state in equilibrium with the exchange: mu u = nu v, f(v) = 0
    p = ModelParams(1.0, 1.0, 2.0, 1.0)
    s = SimState(np.full(SMALL.nx, 0.5), np.ones((SMALL.ny, SMALL.nx)))
    nxt = step(s, p, F, RoadReaction.zero(), SMALL)
    assert np.max(np.abs(nxt.u - 0.5)) < 1e-15 and np.max(np.abs(nxt.v - 1.0)) < 1e-15


def test_dt_above_bound_rejected():
    p = ModelParams(1.0, 1.0, 1.0, 1.0)
    s = initial_state(SMALL)
    with pytest.raises(SimulationError):
        step(s, p, F, RoadReaction.zero(), SMALL, dt=1.0)


def test_front_position_interpolates():
    grid = GridSpec(Lx=5.0, Ly=1.0, dx=1.0, dy=1.0)
    u = np.clip(2.0 - np.abs(grid.x), 0.0, None)  # tent of height 2
    s = SimState(u, np.zeros((grid.ny, grid.nx)))
    xp, xm = front_position(s, grid, 0.5, 2.0)
    assert xp == pytest.approx(1.0) and xm == pytest.approx(-1.0)
    assert all(math.isnan(v) for v in front_position(s, grid, 0.5, 10.0))


def test_estimate_speed_on_synthetic_series():
    series = FrontSeries()
    for t in np.arange(1.0, 101.0):
        series.append(t, 3.0 + 2.5 * t, -1.0 - 1.5 * t, 1.0, 1.0)
    est = estimate_speed(series)
    assert est.w_plus == pytest.approx(2.5) and est.w_minus == pytest.approx(1.5)
    short = FrontSeries()
    for t in range(5):
        short.append(float(t + 1), t, -t, 1.0, 1.0)
    with pytest.raises(ValueError):
        estimate_speed(short)


def test_series_times_must_increase():
    series = FrontSeries()
    series.append(1.0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        series.append(1.0, 0, 0, 0, 0)


def test_run_records_and_mass_grows():
    p = ModelParams(1.0, 1.0, 1.0, 1.0)
    grid = GridSpec(Lx=30.0, Ly=6.0, dx=0.5, dy=0.5, T=10.0, record_every=0.5)
    ref = stationary_mortality(p, F, 0.0)
    state, series, snaps = run(p, F, RoadReaction.zero(), grid, reference=ref, snapshot_times=(5.0,))
    assert state.t == pytest.approx(10.0)
    assert len(series.times) == pytest.approx(20, abs=1)
    assert series.mass[-1] > series.mass[0]
    assert list(snaps) == [5.0] and snaps[5.0].t == pytest.approx(5.0, abs=0.05)
    assert mass(state, grid) == series.mass[-1]


def test_run_warns_near_boundary():
    p = ModelParams(1.0, 1.0, 1.0, 1.0)
    grid = GridSpec(Lx=6.0, Ly=4.0, dx=0.5, dy=0.5, T=8.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        run(p, F, RoadReaction.zero(), grid, reference=1.0)
    assert any("boundary" in str(w.message) for w in caught)


def test_default_height_scales_with_field():
    g = GridSpec().resolved(ModelParams(4.0, 1.0, 1.0, 1.0), FieldReaction.logistic(1.0))
    assert g.Ly == pytest.approx(24.0)


def test_level_sensitivity_small_for_travelling_front():
    p = ModelParams(1.0, 1.0, 1.0, 1.0)
    grid = GridSpec(Lx=160.0, Ly=12.0, dx=0.5, dy=0.5, T=60.0)
    _, series, _ = run(p, F, RoadReaction.zero(), grid, reference=1.0, extra_levels=(0.1, 0.9))
    speeds = level_sensitivity(series)
    assert sorted(speeds) == [0.1, 0.5, 0.9]
    ws = [e.w_plus for e in speeds.values()]
    assert max(ws) - min(ws) < 0.01
    assert all(e.w_plus == pytest.approx(e.w_minus, abs=1e-12) for e in speeds.values())
