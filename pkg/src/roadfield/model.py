"""Model constants, reaction terms and hypothesis checks for the road-field system.

The field density v solves ``v_t - d*Lap(v) = f(v)`` in the upper half-plane, the
road density u solves ``u_t - D*u_xx + q*u_x = nu*v(x,0) - mu*u + g(u)`` on the
line ``y = 0`` and both are tied by the flux condition
``-d*v_y(x,0) = mu*u - nu*v(x,0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def adaptive_simpson(func: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate ``func`` over [a, b] with recursive adaptive Simpson."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    def simpson(x0, f0, x1, f1):
        xm = 0.5 * (x0 + x1)
        fm = float(func(xm))
        return xm, fm, (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1)

    def recurse(x0, f0, x1, f1, xm, fm, whole, eps, depth):
        lm, flm, left = simpson(x0, f0, xm, fm)
        rm, frm, right = simpson(xm, fm, x1, f1)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return (recurse(x0, f0, xm, fm, lm, flm, left, eps / 2, depth - 1)
                + recurse(xm, fm, x1, f1, rm, frm, right, eps / 2, depth - 1))

    fa, fb = float(func(a)), float(func(b))
    xm, fm, whole = simpson(a, fa, b, fb)
    return sign * recurse(a, fa, b, fb, xm, fm, whole, tol, max_depth)


def _central_diff(func: ArrayFunc, s: np.ndarray, h: float = 1e-6) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    lo = np.maximum(s - h, 0.0)
    hi = s + h
    return (np.asarray(func(hi)) - np.asarray(func(lo))) / (hi - lo)


@dataclass(frozen=True)
class ModelParams:
    d: float
    D: float
    mu: float
    nu: float
    q: float = 0.0

    def __post_init__(self):
        for name in ("d", "D", "mu", "nu"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not math.isfinite(self.q):
            raise ValueError(f"q must be finite, got {self.q!r}")

    def oriented(self, direction: int) -> "ModelParams":
        """Parameters seen by a front moving in direction ``direction`` (+1 or -1)."""
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        return self if direction == 1 else replace(self, q=-self.q)


@dataclass(frozen=True)
class FieldReaction:
    """Field nonlinearity f with f(0)=f(1)=0, positive in between."""

    f: ArrayFunc
    f_prime_0: float
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    concave: bool = False

    def __post_init__(self):
        if not self.f_prime_0 > 0:
            raise ValueError("f'(0) must be positive")

    @classmethod
    def logistic(cls, r: float = 1.0) -> "FieldReaction":
        r = float(r)
        return cls(lambda s: r * s * (1.0 - s), r, "logistic", {"r": r}, concave=True)

    @classmethod
    def custom(cls, func: ArrayFunc, f_prime_0: float, concave: bool = False) -> "FieldReaction":
        return cls(func, float(f_prime_0), "custom", {}, concave)

    @classmethod
    def from_samples(cls, s, values, concave: bool = False) -> "FieldReaction":
        """Piecewise-linear f through the points (s_i, f_i); s must start at 0."""
        s = np.asarray(s, dtype=float)
        values = np.asarray(values, dtype=float)
        if s.ndim != 1 or s.shape != values.shape or s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ValueError("samples need increasing abscissae starting at 0")
        slope = (values[1] - values[0]) / (s[1] - s[0])
        right_slope = (values[-1] - values[-2]) / (s[-1] - s[-2])

        def f(x):
            x = np.asarray(x, dtype=float)
            out = np.interp(x, s, values)
            return np.where(x > s[-1], values[-1] + right_slope * (x - s[-1]), out)

        return cls(f, float(slope), "samples", {"s": s, "values": values}, concave)

    def __call__(self, s):
        return self.f(s)

    @property
    def poly(self) -> tuple[float, ...] | None:
        """Ascending polynomial coefficients when f is a built-in polynomial."""
        if self.kind == "logistic":
            r = self.params["r"]
            return (0.0, r, -r)
        return None

    def derivative(self, s):
        if self.kind == "logistic":
            return self.params["r"] * (1.0 - 2.0 * np.asarray(s, dtype=float))
        return _central_diff(self.f, s)

    def antiderivative(self, s):
        """F(s) = int_0^s f, analytic for the logistic built-in."""
        if self.kind == "logistic":
            s = np.asarray(s, dtype=float)
            return self.params["r"] * (s * s / 2.0 - s ** 3 / 3.0)
        if np.ndim(s) == 0:
            return adaptive_simpson(lambda t: self.f(t), 0.0, float(s))
        return np.array([adaptive_simpson(lambda t: self.f(t), 0.0, float(x)) for x in np.ravel(s)]
                        ).reshape(np.shape(s))

    def integral(self, a: float, b: float) -> float:
        if self.kind == "logistic":
            return float(self.antiderivative(b) - self.antiderivative(a))
        return adaptive_simpson(lambda t: self.f(t), float(a), float(b))

    def lipschitz(self, s_max: float) -> float:
        if self.kind == "logistic":
            r = self.params["r"]
            return abs(r) * max(1.0, abs(1.0 - 2.0 * s_max))
        s = np.linspace(0.0, s_max, 4001)
        return float(np.max(np.abs(np.diff(self.f(s)) / np.diff(s))))


@dataclass(frozen=True)
class RoadReaction:
    """Road reaction g with g(0)=0 and g(S) <= 0 for some S > 0.

    ``S_star`` is inf{S > 0 : g(S) <= 0} and ``S_M`` the smallest s beyond which
    g is nonincreasing.
    """

    g: ArrayFunc
    g_prime_0: float
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    S: float | None = None
    S_star: float | None = None
    S_M: float | None = None
    concave: bool = False

    @property
    def rho(self) -> float:
        if self.kind == "mortality":
            return self.params["rho"]
        if self.kind == "zero":
            return 0.0
        raise AttributeError("rho is only defined for zero/mortality road reactions")

    @classmethod
    def zero(cls) -> "RoadReaction":
        return cls(lambda u: np.zeros_like(np.asarray(u, dtype=float)), 0.0, "zero", {},
                   S=1.0, S_star=0.0, S_M=0.0, concave=True)

    @classmethod
    def mortality(cls, rho: float) -> "RoadReaction":
        rho = float(rho)
        if rho < 0:
            raise ValueError("mortality rate rho must be >= 0")
        if rho == 0:
            return cls.zero()
        return cls(lambda u: -rho * np.asarray(u, dtype=float), -rho, "mortality", {"rho": rho},
                   S=1.0, S_star=0.0, S_M=0.0, concave=True)

    @classmethod
    def logistic(cls, s: float = 1.0, kappa: float = 1.0) -> "RoadReaction":
        """g(u) = s*u*(1 - u/kappa); growth on the road capped at kappa."""
        s, kappa = float(s), float(kappa)
        if s <= 0 or kappa <= 0:
            raise ValueError("logistic road reaction needs s > 0 and kappa > 0")
        return cls(lambda u: s * np.asarray(u, dtype=float) * (1.0 - np.asarray(u, dtype=float) / kappa),
                   s, "logistic", {"s": s, "kappa": kappa},
                   S=kappa, S_star=kappa, S_M=kappa / 2.0, concave=True)

    @classmethod
    def custom(cls, func: ArrayFunc, g_prime_0: float, S: float | None = None,
               concave: bool = False, s_max: float = 10.0, n_samples: int = 10_000) -> "RoadReaction":
        """User-supplied g; S_star and S_M are located by scanning [0, s_max]."""
        probe = cls(func, float(g_prime_0), "custom", {}, S=S, concave=concave)
        grid = np.linspace(0.0, s_max, n_samples)
        s_star, s_m, gs = _scan_road(probe, grid)
        if S is None:
            # first sample with g <= 0, so that g(S) <= 0 holds exactly
            hit = np.flatnonzero((grid > 0) & (gs <= 0))
            S = float(grid[hit[0]]) if hit.size else None
        return replace(probe, S=S, S_star=s_star, S_M=s_m)

    def __call__(self, u):
        return self.g(u)

    @property
    def poly(self) -> tuple[float, ...] | None:
        if self.kind == "zero":
            return (0.0,)
        if self.kind == "mortality":
            return (0.0, -self.params["rho"])
        if self.kind == "logistic":
            return (0.0, self.params["s"], -self.params["s"] / self.params["kappa"])
        return None

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind in ("zero", "mortality"):
            return np.full_like(u, self.g_prime_0)
        if self.kind == "logistic":
            return self.params["s"] * (1.0 - 2.0 * u / self.params["kappa"])
        return _central_diff(self.g, u)

    def lipschitz(self, s_max: float) -> float:
        if self.kind in ("zero", "mortality"):
            return abs(self.g_prime_0)
        if self.kind == "logistic":
            s, kappa = self.params["s"], self.params["kappa"]
            return s * max(1.0, abs(1.0 - 2.0 * s_max / kappa))
        s = np.linspace(0.0, s_max, 4001)
        return float(np.max(np.abs(np.diff(self.g(s)) / np.diff(s))))


@dataclass
class Check:
    name: str
    passed: bool
    violation: float | None = None

    def __bool__(self):
        return self.passed


@dataclass
class Diagnostics:
    checks: list[Check]
    resolution: float
    S_star: float | None = None
    S_M: float | None = None

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _first(mask: np.ndarray, s: np.ndarray) -> float | None:
    idx = np.flatnonzero(mask)
    return float(s[idx[0]]) if idx.size else None


def _check(name: str, bad: np.ndarray, s: np.ndarray) -> Check:
    point = _first(bad, s)
    return Check(name, point is None, point)


def _nonincreasing_ratio(values: np.ndarray, s: np.ndarray, name: str) -> Check:
    pos = s > 0
    ratio = values[pos] / s[pos]
    bad = np.zeros_like(s, dtype=bool)
    scale = 1e-10 * np.maximum(1.0, np.abs(ratio[:-1]))
    bad_pos = np.diff(ratio) > scale
    bad[np.flatnonzero(pos)[1:]] = bad_pos
    return _check(name, bad, s)


def validate_field_reaction(f: FieldReaction, n_samples: int = 10_000, s_max: float = 2.0) -> Diagnostics:
    if n_samples < 10:
        raise ValueError("n_samples must be >= 10")
    s = np.linspace(0.0, s_max, n_samples)
    s = np.union1d(s, [1.0])
    fs = np.asarray(f(s), dtype=float)
    f0 = float(f(np.array([0.0]))[0])
    f1 = float(f(np.array([1.0]))[0])
    inner, outer = (s > 0) & (s < 1), s > 1
    checks = [
        Check("f(0)=0", abs(f0) <= 1e-12, None if abs(f0) <= 1e-12 else 0.0),
        Check("f(1)=0", abs(f1) <= 1e-12, None if abs(f1) <= 1e-12 else 1.0),
        _check("f>0 in (0,1)", inner & ~(fs > 0), s),
        _check("f<0 in (1,inf)", outer & ~(fs < 0), s),
        _check("f(s)<=f'(0)s", (s > 0) & (fs > f.f_prime_0 * s + 1e-12 * np.maximum(1.0, s)), s),
    ]
    if f.concave:
        checks.append(_nonincreasing_ratio(fs, s, "f(s)/s nonincreasing"))
    return Diagnostics(checks, resolution=s_max / (n_samples - 1))


def _scan_road(g: RoadReaction, s: np.ndarray) -> tuple[float | None, float | None, np.ndarray]:
    gs = np.asarray(g(s), dtype=float)
    nonpos = (s > 0) & (gs <= 0)
    idx = np.flatnonzero(nonpos)
    if idx.size == 0:
        s_star = None
    elif idx[0] == 1:
        s_star = 0.0
    else:
        i = idx[0]
        # linear interpolation of the sign change between samples i-1 and i
        g0, g1 = gs[i - 1], gs[i]
        s_star = float(s[i - 1] + (s[i] - s[i - 1]) * g0 / (g0 - g1)) if g0 != g1 else float(s[i])
    slope = np.diff(gs) / np.diff(s)
    up = np.flatnonzero(slope > 1e-12)
    if up.size == 0:
        s_m = 0.0
    else:
        j = up[-1]
        if j + 1 < slope.size:
            a, b = slope[j], slope[j + 1]
            mid0, mid1 = 0.5 * (s[j] + s[j + 1]), 0.5 * (s[j + 1] + s[j + 2])
            s_m = float(mid0 + (mid1 - mid0) * a / (a - b))
        else:
            s_m = None  # still increasing at the end of the sampled range
    return s_star, s_m, gs


def validate_road_reaction(g: RoadReaction, n_samples: int = 10_000, s_max: float | None = None) -> Diagnostics:
    if n_samples < 10:
        raise ValueError("n_samples must be >= 10")
    if s_max is None:
        s_max = max(2.0, g.S or 0.0)
    s = np.linspace(0.0, s_max, n_samples)
    s_star, s_m, gs = _scan_road(g, s)
    g0 = float(g(np.array([0.0]))[0])
    checks = [Check("g(0)=0", abs(g0) <= 1e-12, None if abs(g0) <= 1e-12 else 0.0)]
    if g.S is not None:
        gS = float(g(np.array([g.S]))[0])
        checks.append(Check("exists S>0: g(S)<=0", g.S > 0 and gS <= 0, None if gS <= 0 else g.S))
    else:
        checks.append(Check("exists S>0: g(S)<=0", s_star is not None, None if s_star is not None else s_max))
    if g.concave:
        checks.append(_nonincreasing_ratio(gs, s, "g(s)/s nonincreasing"))
    return Diagnostics(checks, resolution=s_max / (n_samples - 1), S_star=s_star, S_M=s_m)


def kpp_speed(d: float, f_prime_0: float) -> float:
    """Invasion speed 2*sqrt(d*f'(0)) of the field equation alone."""
    if not (d > 0 and f_prime_0 > 0):
        raise ValueError("kpp_speed needs d > 0 and f'(0) > 0")
    return 2.0 * math.sqrt(d * f_prime_0)
