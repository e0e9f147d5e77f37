"""Plane-wave geometry of the linearised road-field system and critical speeds.

Exponential solutions ``exp(-alpha*(x - c*t)) * (1, gamma*exp(-beta*y))`` exist
when (beta, alpha) lies both in the slab between the two road roots
alpha_D^-(c, beta) <= alpha <= alpha_D^+(c, beta) and in the disc cut out by
the field equation.  The critical speed w* is the least c >= c_K at which the
two sets meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import FieldReaction, ModelParams, RoadReaction, kpp_speed

BETA_GRID = 4096
TANGENCY_TOL = 1e-10
CHI_INV_CAP = 1e15
BETA_CLAMP = 1e-12


class BracketError(RuntimeError):
    """No intersection found below the doubling cap."""


@dataclass(frozen=True)
class DispersionPoint:
    beta: float
    alpha: float


@dataclass(frozen=True)
class SlabInterval:
    beta: float
    lo: float
    hi: float
    empty: bool = False

    def overlaps(self, other: "SlabInterval", tol: float = 0.0) -> bool:
        if self.empty or other.empty:
            return False
        return max(self.lo, other.lo) <= min(self.hi, other.hi) + tol


@dataclass(frozen=True)
class CriticalSpeed:
    w_star: float
    at_kpp: bool
    witness: DispersionPoint | None
    tol: float
    c_kpp: float = float("nan")


@dataclass(frozen=True)
class LimitConstants:
    h: float
    k: float


def _fp0(f) -> float:
    return f.f_prime_0 if isinstance(f, FieldReaction) else float(f)


def _gp0(g) -> float:
    return g.g_prime_0 if isinstance(g, RoadReaction) else float(g)


def _chi(p: ModelParams, beta):
    return p.d * p.mu * beta / (p.nu + p.d * beta)


def chi(params: ModelParams, beta: float) -> float:
    """Road exchange rate d*mu*beta/(nu + d*beta) felt by a y-profile exp(-beta*y)."""
    if not beta > -params.nu / params.d:
        raise ValueError(f"beta must exceed -nu/d = {-params.nu / params.d}")
    return _chi(params, beta)


def chi_inv(params: ModelParams, m: float) -> float:
    if not m < params.mu:
        raise ValueError("chi takes values below mu only")
    beta = params.nu * m / (params.d * (params.mu - m))
    if not abs(beta) <= CHI_INV_CAP:
        raise OverflowError(f"chi_inv({m}) exceeds {CHI_INV_CAP:g}")
    return beta


def real_roots_exist(params: ModelParams, g_prime_0: float, c: float) -> bool:
    return (c - params.q) ** 2 > 4.0 * params.D * (g_prime_0 - params.mu)


def beta_lower(params: ModelParams, g_prime_0: float, c: float) -> float:
    """Leftmost beta of the road curve at speed c (requires real roots)."""
    m = g_prime_0 - (c - params.q) ** 2 / (4.0 * params.D)
    floor = -params.nu / params.d + BETA_CLAMP
    if not m < params.mu:
        raise ValueError("no real road roots at this speed")
    if m == -math.inf:
        return floor
    beta = params.nu * m / (params.d * (params.mu - m))
    return max(beta, floor)


def _road_roots(D: float, b: float, m):
    """Roots of -D*a^2 + b*a + m = 0 (NaN where complex), cancellation-free."""
    m = np.asarray(m, dtype=float)
    disc = b * b + 4.0 * D * m
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        if b >= 0:
            hi = (b + sq) / (2.0 * D)
            denom = b + sq
            lo = np.where(denom > 0, -2.0 * m / np.where(denom > 0, denom, 1.0), 0.0)
        else:
            lo = (b - sq) / (2.0 * D)
            denom = b - sq
            hi = -2.0 * m / denom
    lo = np.where(np.isnan(sq), np.nan, lo)
    hi = np.where(np.isnan(sq), np.nan, hi)
    return lo, hi


def _sigma_bounds(p: ModelParams, gp0: float, c: float, beta):
    beta = np.asarray(beta, dtype=float)
    m = np.where(beta > -p.nu / p.d, _chi(p, np.where(beta > -p.nu / p.d, beta, 0.0)), -np.inf) - gp0
    return _road_roots(p.D, c - p.q, m)


def _circle_bounds(p: ModelParams, fp0: float, c: float, beta):
    beta = np.asarray(beta, dtype=float)
    r2 = (c * c - 4.0 * p.d * fp0) / (4.0 * p.d * p.d)
    s2 = r2 - beta * beta
    centre = c / (2.0 * p.d)
    with np.errstate(invalid="ignore"):
        s = np.sqrt(np.where(s2 >= 0, s2, np.nan))
    return centre - s, centre + s


def sigma_interval(params: ModelParams, g_prime_0: float, c: float, beta: float) -> SlabInterval:
    """alpha-range [alpha_D^-, alpha_D^+] of the road slab at abscissa beta."""
    if not real_roots_exist(params, g_prime_0, c) or beta <= -params.nu / params.d:
        return SlabInterval(beta, math.nan, math.nan, True)
    lo, hi = _sigma_bounds(params, g_prime_0, c, beta)
    lo, hi = float(lo), float(hi)
    if math.isnan(lo):
        return SlabInterval(beta, math.nan, math.nan, True)
    return SlabInterval(beta, lo, hi)


def circle_interval(params: ModelParams, f_prime_0: float, c: float, beta: float) -> SlabInterval:
    """alpha-range of the field disc at abscissa beta."""
    c_k = kpp_speed(params.d, f_prime_0)
    if c < c_k:
        raise ValueError(f"speed {c} below the KPP speed {c_k}")
    lo, hi = _circle_bounds(params, f_prime_0, c, beta)
    lo, hi = float(lo), float(hi)
    if math.isnan(lo):
        return SlabInterval(beta, math.nan, math.nan, True)
    return SlabInterval(beta, lo, hi)


def _overlap_gap(p, fp0, gp0, c, beta):
    s_lo, s_hi = _sigma_bounds(p, gp0, c, beta)
    g_lo, g_hi = _circle_bounds(p, fp0, c, beta)
    gap = np.maximum(s_lo, g_lo) - np.minimum(s_hi, g_hi)
    return np.where(np.isnan(gap), np.inf, gap)


def overlap_gap(params: ModelParams, f_prime_0: float, g_prime_0: float, c: float,
                beta_grid: int = BETA_GRID) -> tuple[float, float]:
    """Smallest signed gap between slab and disc over beta, and where it occurs.

    Negative or zero means the two sets meet.  Returns (inf, nan) when the
    admissible beta-range is empty.
    """
    p = params
    c_k = kpp_speed(p.d, f_prime_0)
    if c < c_k or not real_roots_exist(p, g_prime_0, c):
        return math.inf, math.nan
    r = math.sqrt(max(c * c - c_k * c_k, 0.0)) / (2.0 * p.d)
    b0 = max(beta_lower(p, g_prime_0, c), -r)
    b1 = r
    if b0 > b1:
        return math.inf, math.nan
    if b1 - b0 <= 0.0:
        gap = float(_overlap_gap(p, f_prime_0, g_prime_0, c, b0))
        return gap, b0
    betas = np.linspace(b0, b1, beta_grid)
    gaps = _overlap_gap(p, f_prime_0, g_prime_0, c, betas)
    i = int(np.argmin(gaps))
    best_gap, best_beta = float(gaps[i]), float(betas[i])
    if not math.isfinite(best_gap):
        return math.inf, math.nan
    lo, hi = betas[max(i - 1, 0)], betas[min(i + 1, beta_grid - 1)]
    res = minimize_scalar(lambda b: float(_overlap_gap(p, f_prime_0, g_prime_0, c, b)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * max(1.0, abs(hi))})
    if res.fun < best_gap:
        best_gap, best_beta = float(res.fun), float(res.x)
    return best_gap, best_beta


def intersects(params: ModelParams, f_prime_0: float, g_prime_0: float, c: float,
               beta_grid: int = BETA_GRID) -> bool:
    c_k = kpp_speed(params.d, f_prime_0)
    if c < c_k:
        raise ValueError(f"speed {c} below the KPP speed {c_k}")
    if c == c_k:
        s = sigma_interval(params, g_prime_0, c, 0.0)
        if s.empty or beta_lower(params, g_prime_0, c) > 0.0:
            return False
        a = c / (2.0 * params.d)
        return s.lo - TANGENCY_TOL <= a <= s.hi + TANGENCY_TOL
    gap, _ = overlap_gap(params, f_prime_0, g_prime_0, c, beta_grid)
    return gap <= TANGENCY_TOL


def _witness(p, fp0, gp0, c, beta_grid) -> DispersionPoint | None:
    gap, beta = overlap_gap(p, fp0, gp0, c, beta_grid)
    if not math.isfinite(gap):
        return None
    s_lo, _ = _sigma_bounds(p, gp0, c, beta)
    g_lo, _ = _circle_bounds(p, fp0, c, beta)
    return DispersionPoint(beta, float(max(s_lo, g_lo)))


def critical_speed(params: ModelParams, f, g, direction: int = 1, tol: float = 1e-8,
                   beta_grid: int = BETA_GRID, max_doublings: int = 40) -> CriticalSpeed:
    """Least c >= c_K at which the road slab meets the field disc.

    ``f`` and ``g`` may be reaction objects or just their slopes at 0.
    Direction -1 measures leftward spreading (transport reversed).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    p = params.oriented(direction)
    fp0, gp0 = _fp0(f), _gp0(g)
    c_k = kpp_speed(p.d, fp0)
    if intersects(p, fp0, gp0, c_k, beta_grid):
        # the disc degenerates to its centre at c = c_K
        return CriticalSpeed(c_k, True, DispersionPoint(0.0, c_k / (2.0 * p.d)), tol, c_k)
    lo, step = c_k, 1.0
    for _ in range(max_doublings + 1):
        hi = c_k + step
        if intersects(p, fp0, gp0, hi, beta_grid):
            break
        lo, step = hi, 2.0 * step
    else:
        raise BracketError(f"no intersection below c = {c_k + step / 2:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if intersects(p, fp0, gp0, mid, beta_grid):
            hi = mid
        else:
            lo = mid
    return CriticalSpeed(0.5 * (lo + hi), False, _witness(p, fp0, gp0, hi, beta_grid), tol, c_k)


def threshold_margin(params: ModelParams, f_prime_0: float, g_prime_0: float, direction: int = 1) -> float:
    """(2 - g'(0)/f'(0) -/+ q/sqrt(d f'(0))) - D/d; nonnegative iff w* = c_K."""
    p = params.oriented(direction)
    return 2.0 - g_prime_0 / f_prime_0 - p.q / math.sqrt(p.d * f_prime_0) - p.D / p.d


def threshold_predicts_ck(params: ModelParams, f_prime_0: float, g_prime_0: float, direction: int = 1) -> bool:
    p = params.oriented(direction)
    return p.D / p.d <= 2.0 - g_prime_0 / f_prime_0 - p.q / math.sqrt(p.d * f_prime_0)


def threshold_predicts_ck_mortality(params: ModelParams, f_prime_0: float, rho: float, direction: int = 1) -> bool:
    """Same threshold written with the mortality rate rho = -g'(0)."""
    p = params.oriented(direction)
    return p.D / p.d <= 2.0 + rho / f_prime_0 - p.q / math.sqrt(p.d * f_prime_0)


# --- large-diffusion constant -------------------------------------------------

def _h_gap(p: ModelParams, fp0: float, gp0: float, c: float, beta_grid: int) -> float:
    """min over beta of parabola - upper road root, with D = 1 and q = 0."""
    if not c * c > 4.0 * (gp0 - p.mu):
        return math.inf
    unit = ModelParams(p.d, 1.0, p.mu, p.nu, 0.0)
    b0 = beta_lower(unit, gp0, c)
    a_max = (c + math.sqrt(c * c + 4.0 * max(p.mu - gp0, 0.0))) / 2.0
    b1 = max(b0, 0.0) + math.sqrt(max(c * a_max - fp0, 0.0) / p.d) + 1.0

    def gap(beta):
        _, hi = _sigma_bounds(unit, gp0, c, beta)
        out = (fp0 + p.d * np.asarray(beta) ** 2) / c - hi
        return np.where(np.isnan(out), np.inf, out)

    betas = np.linspace(b0, b1, beta_grid)
    gaps = gap(betas)
    i = int(np.argmin(gaps))
    best = float(gaps[i])
    lo, hi = betas[max(i - 1, 0)], betas[min(i + 1, beta_grid - 1)]
    res = minimize_scalar(lambda b: float(gap(b)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * max(1.0, abs(hi))})
    return min(best, float(res.fun))


def limit_h(params: ModelParams, f_prime_0: float, g_prime_0: float, rtol: float = 1e-12,
            beta_grid: int = BETA_GRID) -> float:
    """Constant h with w*/sqrt(D) -> h as D grows; q never enters."""
    p, fp0, gp0 = params, _fp0(f_prime_0), _gp0(g_prime_0)

    def meets(c):
        return _h_gap(p, fp0, gp0, c, beta_grid) <= TANGENCY_TOL

    lo = hi = 1.0
    if meets(hi):
        while meets(lo):
            lo /= 2.0
            if lo < 1e-300:
                raise BracketError("limit_h: intersection persists as c -> 0")
        hi = 2.0 * lo
    else:
        while not meets(hi):
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise BracketError("limit_h: no intersection found")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- large-transport constant -------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(func, a: float, b: float, tol: float = 1e-13) -> tuple[float, float]:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def limit_k(params: ModelParams, f_prime_0: float, g_prime_0: float) -> float:
    """Constant k with w*/q -> k as q grows (1 when g'(0) >= mu)."""
    p, fp0, gp0 = params, _fp0(f_prime_0), _gp0(g_prime_0)
    if gp0 >= p.mu:
        return 1.0

    def ratio(beta):
        beta = np.asarray(beta, dtype=float)
        return (_chi(p, beta) - gp0) / (fp0 + p.d * beta * beta)

    betas = np.concatenate(([0.0], np.geomspace(1e-8, 1e8, BETA_GRID)))
    values = ratio(betas)
    i = int(np.argmax(values))
    a, b = betas[max(i - 1, 0)], betas[min(i + 1, betas.size - 1)]
    _, best = _golden_max(lambda x: float(ratio(x)), a, b)
    best = max(best, float(values[i]))
    return 1.0 / (1.0 + best)


def limit_constants(params: ModelParams, f_prime_0: float, g_prime_0: float) -> LimitConstants:
    return LimitConstants(limit_h(params, f_prime_0, g_prime_0), limit_k(params, f_prime_0, g_prime_0))
