"""x-independent stationary states (U, V(y)) of the road-field system.

They solve ``-d V'' = f(V)`` for y > 0 with ``nu V(0) = mu U - g(U)`` and
``-d V'(0) = g(U)``.  Two routes are provided: the energy route, which reduces
the problem to a scalar root of an explicit function, and the shooting route,
which integrates the initial value problem for V from each trial road value U
and bisects on the boundary of the set of U giving positive trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ._kernels import rk4_classify
from .model import FieldReaction, ModelParams, RoadReaction

HITS_ZERO = "hits-zero"
BLOWS_UP = "blows-up"
POSITIVE = "positive-bounded"
BLOWUP_CAP = 1e3


class StationaryError(RuntimeError):
    pass


@dataclass
class StationaryProfile:
    U: float
    V0: float
    V_prime_0: float
    y_grid: np.ndarray
    V: np.ndarray
    converged: bool
    residual: float
    method: str = ""
    notes: list[str] = field(default_factory=list)

    def V_at(self, y):
        """V on arbitrary y; beyond the sampled range V is held at its last value."""
        return np.interp(y, self.y_grid, self.V)


@dataclass
class Trajectory:
    y: np.ndarray
    V: np.ndarray
    Vp: np.ndarray
    classification: str
    event_y: float | None
    energy_drift: float


def default_y_max(params: ModelParams, f: FieldReaction) -> float:
    return 50.0 / math.sqrt(f.f_prime_0 / params.d)


def boundary_values(params: ModelParams, g: RoadReaction, U: float) -> tuple[float, float]:
    gU = float(g(np.array([U]))[0])
    return (params.mu * U - gU) / params.nu, -gU / params.d


# --- energy route ---------------------------------------------------------------

def theta_mortality(params: ModelParams, f: FieldReaction, rho: float, sigma: float) -> float:
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    p = params
    a = p.nu ** 2 * rho ** 2 / (2.0 * p.d * (p.mu + rho) ** 2)
    return a * sigma * sigma - f.integral(sigma, 1.0)


def theta_general(params: ModelParams, g: RoadReaction, f: FieldReaction, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    gs = float(g(np.array([sigma]))[0])
    G = (params.mu * sigma - gs) / params.nu
    return gs * gs + 2.0 * params.d * f.integral(1.0, G)


def energy_residual(profile: StationaryProfile, params: ModelParams, f: FieldReaction) -> float:
    """|int_{V(0)}^1 f - d V'(0)^2 / 2|, zero for an exact bounded solution."""
    return abs(f.integral(profile.V0, 1.0) - 0.5 * params.d * profile.V_prime_0 ** 2)


def profile_from_boundary(params: ModelParams, f: FieldReaction, U: float, V0: float, Vp0: float,
                          y_max: float | None = None, dy: float = 1e-3, method: str = "",
                          tol: float = 1e-6) -> StationaryProfile:
    """Sample V on [0, y_max] along the orbit that relaxes to 1.

    Uses the first integral ``d V'^2 / 2 = int_V^1 f``, which is stable towards
    V = 1 where the second-order problem is a saddle.
    """
    if y_max is None:
        y_max = default_y_max(params, f)
    n = int(round(y_max / dy)) + 1
    y = np.linspace(0.0, y_max, n)
    if V0 == 1.0:
        V = np.ones_like(y)
    else:
        sign = 1.0 if V0 < 1.0 else -1.0

        def rhs(_, v):
            e = f.integral(float(v[0]), 1.0)
            return [sign * math.sqrt(max(2.0 * e / params.d, 0.0))]

        sol = solve_ivp(rhs, (0.0, y_max), [V0], method="DOP853", t_eval=y,
                        rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise StationaryError(sol.message)
        V = sol.y[0]
    residual = abs(float(V[-1]) - 1.0)
    return StationaryProfile(U, V0, Vp0, y, V, residual < tol, residual, method)


def stationary_mortality(params: ModelParams, f: FieldReaction, rho: float,
                         y_max: float | None = None, dy: float = 1e-3) -> StationaryProfile:
    """Stationary state for g(u) = -rho*u via the root of theta_mortality."""
    p = params
    if theta_mortality(p, f, rho, 0.0) >= 0:
        raise StationaryError("theta(0) >= 0: root not bracketed (invalid f)")
    t1 = theta_mortality(p, f, rho, 1.0)
    if t1 < 0:
        raise StationaryError("theta(1) < 0: root not bracketed (invalid f)")
    if t1 == 0.0:
        sigma0 = 1.0
    else:
        sigma0 = brentq(lambda s: theta_mortality(p, f, rho, s), 0.0, 1.0, xtol=1e-15, rtol=1e-15,
                        maxiter=500)
    U = p.nu * sigma0 / (p.mu + rho)
    Vp0 = p.nu * rho * sigma0 / (p.d * (p.mu + rho))
    return profile_from_boundary(p, f, U, sigma0, Vp0, y_max, dy, method="theta-root")


# --- shooting route -------------------------------------------------------------

def _shoot_batch(params: ModelParams, f: FieldReaction, V0: np.ndarray, Vp0: np.ndarray,
                 y_max: float, dy: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate -d V'' = f(V) by RK4 for many initial data at once.

    Returns per-trajectory classification codes (0 positive, 1 hits zero,
    2 blows up) and the event abscissae (nan if none).
    """
    inv_d = 1.0 / params.d
    if f.poly is not None:
        return rk4_classify(np.asarray(V0, dtype=float), np.asarray(Vp0, dtype=float), inv_d,
                            np.array(f.poly), float(y_max), float(dy), BLOWUP_CAP)
    V = np.array(V0, dtype=float)
    W = np.array(Vp0, dtype=float)
    code = np.zeros(V.size, dtype=int)
    event = np.full(V.size, np.nan)
    code[V <= 0] = 1
    event[V <= 0] = 0.0
    active = code == 0
    n_steps = int(math.ceil(y_max / dy))
    h = dy

    def acc(v):
        return -inv_d * f(v)

    for step in range(n_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        v, w = V[idx], W[idx]
        k1v, k1w = w, acc(v)
        k2v, k2w = w + 0.5 * h * k1w, acc(v + 0.5 * h * k1v)
        k3v, k3w = w + 0.5 * h * k2w, acc(v + 0.5 * h * k2v)
        k4v, k4w = w + h * k3w, acc(v + h * k3v)
        v_new = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        w_new = w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
        y_new = (step + 1) * h
        zero = v_new <= 0
        up = ~zero & (((v_new > 1.0) & (w_new > 0)) | (v_new > BLOWUP_CAP))
        if zero.any():
            j = idx[zero]
            frac = v[zero] / (v[zero] - v_new[zero])
            event[j] = y_new - h + h * frac
            code[j] = 1
            active[j] = False
        if up.any():
            j = idx[up]
            event[j] = y_new
            code[j] = 2
            active[j] = False
        V[idx], W[idx] = v_new, w_new
    return code, event


def shoot(params: ModelParams, g: RoadReaction, f: FieldReaction, U: float,
          y_max: float | None = None, dy: float = 1e-3, energy_tol: float = 1e-6) -> Trajectory:
    """Integrate V from the boundary data induced by road value U and classify it."""
    if not U > 0:
        raise ValueError("U must be positive")
    if y_max is None:
        y_max = default_y_max(params, f)
    if not y_max > 0:
        raise ValueError("y_max must be positive")
    V0, Vp0 = boundary_values(params, g, U)
    n = int(math.ceil(y_max / dy))
    ys, Vs, Ws = [0.0], [V0], [Vp0]
    v, w = V0, Vp0
    inv_d = 1.0 / params.d

    def acc(x):
        return -inv_d * float(f(x))

    classification, event_y = POSITIVE, None
    if v <= 0:
        classification, event_y = HITS_ZERO, 0.0
        n = 0
    for i in range(n):
        k1v, k1w = w, acc(v)
        k2v, k2w = w + 0.5 * dy * k1w, acc(v + 0.5 * dy * k1v)
        k3v, k3w = w + 0.5 * dy * k2w, acc(v + 0.5 * dy * k2v)
        k4v, k4w = w + dy * k3w, acc(v + dy * k3v)
        v_new = v + dy / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        w_new = w + dy / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
        y_new = (i + 1) * dy
        if v_new <= 0:
            frac = v / (v - v_new)
            event_y = y_new - dy + dy * frac
            ys.append(event_y)
            Vs.append(0.0)
            Ws.append(w + (w_new - w) * frac)
            classification = HITS_ZERO
            break
        ys.append(y_new)
        Vs.append(v_new)
        Ws.append(w_new)
        v, w = v_new, w_new
        if (v > 1.0 and w > 0) or v > BLOWUP_CAP:
            classification, event_y = BLOWS_UP, y_new
            break
    y, V, W = np.array(ys), np.array(Vs), np.array(Ws)
    # Hamiltonian d V'^2/2 + F(V) is conserved by the exact flow
    e0 = 0.5 * params.d * W[0] ** 2
    e1 = 0.5 * params.d * W[-1] ** 2 + f.integral(V[0], V[-1])
    scale = max(1.0, abs(e0), abs(f.integral(0.0, max(V.max(), 1.0))))
    drift = abs(e1 - e0) / scale
    if drift > energy_tol:
        raise StationaryError(f"energy drift {drift:.3g} exceeds {energy_tol:g}; step dy={dy} too large")
    return Trajectory(y, V, W, classification, event_y, drift)


def _classify(params, g, f, Us, y_max, dy):
    Us = np.asarray(Us, dtype=float)
    gU = np.asarray(g(Us), dtype=float)
    V0 = (params.mu * Us - gU) / params.nu
    Vp0 = -gU / params.d
    code, _ = _shoot_batch(params, f, V0, Vp0, y_max, dy)
    return code


def _upper_road_value(params: ModelParams, g: RoadReaction) -> float:
    S = g.S if g.S is not None else (g.S_star or 0.0)
    return max(params.nu / params.mu, S)


def find_Ustar(params: ModelParams, g: RoadReaction, f: FieldReaction, tol: float = 1e-13,
               y_max: float | None = None, dy: float = 1e-3, batch: int = 128,
               bracket: tuple[float, float] | None = None) -> StationaryProfile:
    """Infimum U* of road values whose field trajectory stays positive.

    The bracket is narrowed by classifying ``batch`` trial values per sweep.
    Without concavity of g the result is only the smallest such U found and
    the profile carries the note "minimal-candidate".
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if y_max is None:
        y_max = default_y_max(params, f)
    if bracket is None:
        hi = _upper_road_value(params, g)
        lo = hi * 1e-6
    else:
        lo, hi = map(float, bracket)
    codes = _classify(params, g, f, [lo, hi], y_max, dy)
    if codes[1] == 1:
        raise StationaryError(f"upper bracket U={hi:g} does not give a positive trajectory")
    if codes[0] != 1:
        raise StationaryError(f"lower bracket U={lo:g} does not hit zero")
    while hi - lo > tol * max(1.0, hi):
        Us = np.linspace(lo, hi, batch + 2)[1:-1]
        codes = _classify(params, g, f, Us, y_max, dy)
        good = np.flatnonzero(codes != 1)
        if good.size == 0:
            lo = Us[-1]
            continue
        i = good[0]
        new_hi = Us[i]
        new_lo = Us[i - 1] if i > 0 else lo
        if new_hi == hi and new_lo == lo:
            break
        lo, hi = new_lo, new_hi
    U = hi
    V0, Vp0 = boundary_values(params, g, U)
    profile = profile_from_boundary(params, f, U, V0, Vp0, y_max, dy, method="shooting")
    if not g.concave:
        profile.notes.append("minimal-candidate")
    return profile


def check_bounds(profile: StationaryProfile, params: ModelParams, g: RoadReaction,
                 tol: float = 1e-6) -> bool:
    """Order relations between U, nu/mu, S_* and V implied by g(s)/s nonincreasing."""
    s_star = g.S_star
    if s_star is None:
        raise ValueError("road reaction has no S_star")
    ratio = params.nu / params.mu
    U, V = profile.U, profile.V
    ok = True
    if s_star <= ratio:
        ok &= s_star - tol <= U <= ratio + tol and bool(np.all(V <= 1.0 + tol))
    if s_star >= ratio:
        ok &= ratio - tol <= U <= s_star + tol and bool(np.all(V >= 1.0 - tol))
    return bool(ok)
