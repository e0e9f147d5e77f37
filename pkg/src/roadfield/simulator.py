"""Explicit finite-difference simulation of the road-field system.

Domain: road x in [-Lx, Lx], field [-Lx, Lx] x [0, Ly].  Diffusion uses
centred second differences, transport on the road is upwinded, and the flux
condition at y = 0 enters through a ghost row.  Lateral and top boundaries are
homogeneous Neumann.  Under the time-step bound of :func:`stable_dt` every
coefficient of the update is nonnegative, so the scheme is monotone: it keeps
data nonnegative and ordered data ordered.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from ._kernels import explicit_step, quadratic_coeffs
from .model import FieldReaction, ModelParams, RoadReaction
from .stationary import StationaryProfile

log = logging.getLogger(__name__)

CFL_SAFETY = 0.9
BLOWUP_LIMIT = 1e6
BOUNDARY_GUARD_CELLS = 10


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    Lx: float = 400.0
    Ly: float | None = None  # None: 12 * sqrt(d / f'(0))
    dx: float = 0.25
    dy: float = 0.25
    dt: float | None = None  # None: largest monotone step
    T: float = 150.0
    record_every: float = 1.0

    def __post_init__(self):
        for name in ("Lx", "dx", "dy", "T", "record_every"):
            if not getattr(self, name) > 0:
                raise ValueError(f"grid {name} must be positive")
        if self.Ly is not None and not self.Ly > 0:
            raise ValueError("grid Ly must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("grid dt must be positive")

    def resolved(self, params: ModelParams, f: FieldReaction) -> "GridSpec":
        if self.Ly is not None:
            return self
        return replace(self, Ly=12.0 * math.sqrt(params.d / f.f_prime_0))

    @property
    def nx(self) -> int:
        return int(round(2 * self.Lx / self.dx)) + 1

    @property
    def ny(self) -> int:
        return int(round(self.Ly / self.dy)) + 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.Lx, self.Lx, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.Ly, self.ny)


@dataclass
class SimState:
    u: np.ndarray
    v: np.ndarray  # shape (ny, nx), row 0 is y = 0
    t: float = 0.0

    def copy(self) -> "SimState":
        return SimState(self.u.copy(), self.v.copy(), self.t)


@dataclass
class FrontSeries:
    times: list[float] = field(default_factory=list)
    front_x_plus: list[float] = field(default_factory=list)
    front_x_minus: list[float] = field(default_factory=list)
    u_max: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    level: float = 0.5
    # fronts at additional levels: level -> (x_plus list, x_minus list)
    extra: dict = field(default_factory=dict)

    def append(self, t, xp, xm, umax, mass):
        if self.times and not t > self.times[-1]:
            raise ValueError("front series times must increase")
        self.times.append(t)
        self.front_x_plus.append(xp)
        self.front_x_minus.append(xm)
        self.u_max.append(umax)
        self.mass.append(mass)


@dataclass(frozen=True)
class SpeedEstimate:
    w_plus: float
    err_plus: float
    w_minus: float
    err_minus: float
    n_samples: int


def supersolution_level(params: ModelParams, g: RoadReaction, u_sup: float, v_sup: float) -> float:
    """Factor M such that the constant pair M*(nu, mu) dominates the data."""
    S = g.S if g.S is not None else 1.0
    return max((u_sup + S) / params.nu, (v_sup + 1.0) / params.mu)


def stable_dt(params: ModelParams, f: FieldReaction, g: RoadReaction, dx: float, dy: float,
              s_max: float) -> float:
    """Largest forward-Euler step keeping the scheme monotone for values in [0, s_max]."""
    p = params
    road = 2.0 * p.D / dx ** 2 + abs(p.q) / dx + p.mu + g.lipschitz(s_max)
    field_rate = (2.0 * p.d / dx ** 2 + 2.0 * p.d / dy ** 2 + 2.0 * p.nu / dy
                  + f.lipschitz(s_max))
    return CFL_SAFETY / max(road, field_rate)


def _s_max(params, g, state):
    M = supersolution_level(params, g, float(state.u.max(initial=0.0)), float(state.v.max(initial=0.0)))
    return M * max(params.nu, params.mu)


def _step_numpy(u, v, dt, grid, p, f, g):
    dx, dy = grid.dx, grid.dy
    up = np.concatenate(([u[1]], u, [u[-2]]))
    lap_u = (up[:-2] - 2.0 * u + up[2:]) * (p.D / dx ** 2)
    if p.q > 0:
        adv = p.q * (u - up[:-2]) / dx
    else:
        adv = p.q * (up[2:] - u) / dx
    exch = p.mu * u - p.nu * v[0]
    u_new = u + dt * (lap_u - adv - exch + g(u))
    vx = np.concatenate((v[:, 1:2], v, v[:, -2:-1]), axis=1)
    lap_x = (vx[:, :-2] - 2.0 * v + vx[:, 2:]) * (p.d / dx ** 2)
    below = np.vstack((v[1:2], v[:-1]))
    above = np.vstack((v[1:], v[-2:-1]))
    lap_y = (below - 2.0 * v + above) * (p.d / dy ** 2)
    lap_y[0] += (2.0 / dy) * exch
    v_new = v + dt * (lap_x + lap_y + f(v))
    return u_new, v_new


def step(state: SimState, params: ModelParams, f: FieldReaction, g: RoadReaction, grid: GridSpec,
         dt: float | None = None, out: SimState | None = None) -> SimState:
    """One explicit Euler step.

    Road: ``u += dt*(D u_xx - q u_x + nu v(x,0) - mu u + g(u))`` with upwinded
    transport; field: ``v += dt*(d Lap v + f(v))``; at y = 0 the ghost value
    ``v_{-1} = v_1 + (2 dy/d)(mu u - nu v_0)`` closes the centred flux condition.
    """
    grid = grid.resolved(params, f)
    bound = stable_dt(params, f, g, grid.dx, grid.dy, _s_max(params, g, state))
    if dt is None:
        dt = grid.dt if grid.dt is not None else bound
    if dt > bound * (1 + 1e-12):
        raise SimulationError(f"dt={dt:g} exceeds the monotone bound {bound:g}")
    if out is None:
        out = SimState(np.empty_like(state.u), np.empty_like(state.v))
    _advance(state, out, dt, params, f, g, grid)
    return out


def _advance(state, out, dt, params, f, g, grid):
    if f.poly is not None and g.poly is not None and len(f.poly) <= 3 and len(g.poly) <= 3:
        explicit_step(state.u, state.v, out.u, out.v, dt, grid.dx, grid.dy, params.d, params.D,
                      params.mu, params.nu, params.q, quadratic_coeffs(f.poly), quadratic_coeffs(g.poly))
    else:
        out.u[...], out.v[...] = _step_numpy(state.u, state.v, dt, grid, params, f, g)
    out.t = state.t + dt


def _check_finite(state: SimState):
    m = max(np.abs(state.u).max(), np.abs(state.v).max())
    if not math.isfinite(m) or m > BLOWUP_LIMIT:
        raise SimulationError(f"instability detected at t={state.t:g} (max |value| = {m:g})")


def front_position(state: SimState, grid: GridSpec, level: float, reference: StationaryProfile | float
                   ) -> tuple[float, float]:
    """Rightmost and leftmost road positions where u crosses level*U.

    Returns (nan, nan) when u stays below the level everywhere.
    """
    U = reference.U if isinstance(reference, StationaryProfile) else float(reference)
    if not U > 0:
        raise ValueError("reference U must be positive")
    x = grid.x
    u = state.u
    thr = level * U
    above = np.flatnonzero(u >= thr)
    if above.size == 0:
        return math.nan, math.nan
    i, j = above[-1], above[0]
    if i == u.size - 1:
        xp = x[-1]
    else:
        xp = x[i] + grid.dx * (u[i] - thr) / (u[i] - u[i + 1])
    if j == 0:
        xm = x[0]
    else:
        xm = x[j] - grid.dx * (u[j] - thr) / (u[j] - u[j - 1])
    return float(xp), float(xm)


def mass(state: SimState, grid: GridSpec) -> float:
    return float(state.u.sum() * grid.dx + state.v.sum() * grid.dx * grid.dy)


def initial_state(grid: GridSpec, u0=None, v0=None) -> SimState:
    """Default datum: u = 1 on |x| <= 1, v = 0."""
    x = grid.x
    if u0 is None:
        u = (np.abs(x) <= 1.0).astype(float)
    elif callable(u0):
        u = np.asarray(u0(x), dtype=float)
    else:
        u = np.array(u0, dtype=float)
    if v0 is None:
        v = np.zeros((grid.ny, grid.nx))
    elif callable(v0):
        X, Y = np.meshgrid(x, grid.y)
        v = np.asarray(v0(X, Y), dtype=float)
    else:
        v = np.array(v0, dtype=float)
    if u.shape != (grid.nx,) or v.shape != (grid.ny, grid.nx):
        raise ValueError("initial data do not match the grid")
    return SimState(u, v, 0.0)


def run(params: ModelParams, f: FieldReaction, g: RoadReaction, grid: GridSpec,
        u0=None, v0=None, reference: StationaryProfile | float | None = None, level: float = 0.5,
        snapshot_times=(), state: SimState | None = None, extra_levels=()):
    """Integrate to grid.T, recording fronts every grid.record_every.

    Returns (final state, FrontSeries, snapshots) where snapshots maps each
    requested time to a copy of the state.  Fronts at ``extra_levels`` are
    kept in ``series.extra`` for sensitivity checks.
    """
    grid = grid.resolved(params, f)
    if state is None:
        state = initial_state(grid, u0, v0)
    if reference is None:
        from .stationary import find_Ustar, stationary_mortality
        if g.kind in ("zero", "mortality"):
            reference = stationary_mortality(params, f, g.rho)
        else:
            reference = find_Ustar(params, g, f)
    U = reference.U if isinstance(reference, StationaryProfile) else float(reference)
    # comparison with the constant supersolution keeps values below s_max for all t
    bound = stable_dt(params, f, g, grid.dx, grid.dy, _s_max(params, g, state))
    dt = grid.dt if grid.dt is not None else bound
    if dt > bound * (1 + 1e-12):
        raise SimulationError(f"dt={dt:g} exceeds the monotone bound {bound:g}")
    series = FrontSeries(level=level, extra={lv: ([], []) for lv in extra_levels})
    snaps = {}
    pending = sorted(snapshot_times)
    buf = SimState(np.empty_like(state.u), np.empty_like(state.v))
    n_steps = int(math.ceil(grid.T / dt - 1e-9))
    dt = grid.T / n_steps
    record_stride = max(1, int(round(grid.record_every / dt)))
    warned = False
    for n in range(1, n_steps + 1):
        _advance(state, buf, dt, params, f, g, grid)
        state, buf = buf, state
        if n % record_stride == 0 or n == n_steps:
            _check_finite(state)
            xp, xm = front_position(state, grid, level, U)
            series.append(state.t, xp, xm, float(state.u.max()), mass(state, grid))
            for lv, (xps, xms) in series.extra.items():
                a, b = front_position(state, grid, lv, U)
                xps.append(a)
                xms.append(b)
            guard = BOUNDARY_GUARD_CELLS * grid.dx
            if not warned and (xp >= grid.Lx - guard or xm <= -grid.Lx + guard):
                warnings.warn(f"front within {BOUNDARY_GUARD_CELLS} cells of the x-boundary at t={state.t:g}")
                warned = True
        while pending and state.t >= pending[0] - 0.5 * dt:
            snaps[pending.pop(0)] = state.copy()
    return state, series, snaps


def estimate_speed(series: FrontSeries, fit_window: float = 0.5) -> SpeedEstimate:
    """Least-squares slopes of the two fronts over the last fraction of the record."""
    t = np.asarray(series.times)
    xp = np.asarray(series.front_x_plus)
    xm = np.asarray(series.front_x_minus)
    ok = np.isfinite(xp) & np.isfinite(xm)
    t, xp, xm = t[ok], xp[ok], xm[ok]
    if t.size == 0:
        raise ValueError("insufficient samples: no front recorded")
    keep = t >= t[-1] - fit_window * (t[-1] - t[0])
    if keep.sum() < 10:
        raise ValueError(f"insufficient samples in fit window ({int(keep.sum())} < 10)")
    rp = stats.linregress(t[keep], xp[keep])
    rm = stats.linregress(t[keep], xm[keep])
    return SpeedEstimate(float(rp.slope), float(rp.stderr), float(-rm.slope), float(rm.stderr),
                         int(keep.sum()))


def level_sensitivity(series: FrontSeries, fit_window: float = 0.5) -> dict[float, SpeedEstimate]:
    """Speed estimates for the main level and every extra level of a run."""
    out = {series.level: estimate_speed(series, fit_window)}
    for lv, (xps, xms) in series.extra.items():
        sub = FrontSeries(list(series.times), list(xps), list(xms), list(series.u_max),
                          list(series.mass), lv)
        out[lv] = estimate_speed(sub, fit_window)
    return dict(sorted(out.items()))


def profile_error(state: SimState, grid: GridSpec, stationary: StationaryProfile,
                  window_halfwidth: float) -> float:
    """sup over |x| <= window of |u - U| and |v - V(y)|."""
    cols = np.abs(grid.x) <= window_halfwidth
    V = stationary.V_at(grid.y)
    err_u = np.abs(state.u[cols] - stationary.U).max(initial=0.0)
    err_v = np.abs(state.v[:, cols] - V[:, None]).max(initial=0.0)
    return float(max(err_u, err_v))
