"""Independent reference computations used to freeze expected values.

Nothing here imports the dispersion or stationary modules: the plane-wave
conditions are re-evaluated straight from the two polynomial inequalities
and the boundary value problems are solved with scipy's generic tools.
"""

from __future__ import annotations

import math

import numpy as np


def brute_force_speed(d, D, mu, nu, q, fp0, gp0, dc=1e-3, dbeta=1e-3, c_max=None):
    """First c on a grid of step dc (from c_K) where some (beta, alpha) satisfies

        -D a^2 + (c-q) a + chi(beta) - g'(0) >= 0   (road slab)
        c a - d (a^2 + beta^2) - f'(0) >= 0          (field disc)

    beta is scanned with step dbeta; for each beta the concave road polynomial
    is maximised over the disc's alpha-interval by clipping its vertex.
    """
    c_k = 2.0 * math.sqrt(d * fp0)
    if c_max is None:
        c_max = c_k + 50.0
    # c = c_K: the disc is the single point (0, c_K/(2d))
    a0 = c_k / (2 * d)
    if -D * a0 * a0 + (c_k - q) * a0 - gp0 >= -1e-12:
        return c_k
    n_chunk = 64
    k = 1
    while True:
        cs = c_k + dc * np.arange(k, k + n_chunk)
        r_max = math.sqrt(cs[-1] ** 2 - c_k ** 2) / (2 * d)
        lo_beta = max(-r_max, -nu / d + dbeta)
        betas = np.arange(lo_beta, r_max + dbeta, dbeta)
        C = cs[:, None]
        B = betas[None, :]
        s2 = (C * C - c_k * c_k) / (4 * d * d) - B * B
        valid = s2 >= 0
        s = np.sqrt(np.where(valid, s2, 0.0))
        a_lo = C / (2 * d) - s
        a_hi = C / (2 * d) + s
        vertex = (C - q) / (2 * D)
        a = np.clip(vertex, a_lo, a_hi)
        chi = d * mu * B / (nu + d * B)
        road = -D * a * a + (C - q) * a + chi - gp0
        ok = valid & (road >= 0)
        hit = np.flatnonzero(ok.any(axis=1))
        if hit.size:
            return float(cs[hit[0]])
        k += n_chunk
        if cs[-1] > c_max:
            raise RuntimeError("brute force scan found no intersection")


def brute_force_h(d, mu, nu, fp0, gp0, dbeta=1e-5, beta_max=20.0, tol=1e-9):
    """Least c where the D=1, q=0 road slab reaches the parabola
    a = (f'(0) + d beta^2)/c, i.e. the road polynomial is >= 0 somewhere on the
    parabola over a dense beta grid; bisection in c on that grid test."""
    betas = np.arange(-nu / d + dbeta, beta_max, dbeta)
    chi = d * mu * betas / (nu + d * betas)

    def meets(c):
        a = (fp0 + d * betas ** 2) / c
        return bool(np.any(-a * a + c * a + chi - gp0 >= 0))

    lo, hi = 1e-6, 1.0
    while not meets(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if meets(mid) else (mid, hi)
    return hi


def k_from_cubic():
    """Large-transport constant for d=mu=nu=f'(0)=1, g'(0)=0.

    Maximise b/((1+b)(1+b^2)); the stationarity condition is 2b^3 + b^2 - 1 = 0.
    """
    roots = np.roots([2.0, 1.0, 0.0, -1.0])
    b = float(next(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0))
    m = b / ((1 + b) * (1 + b * b))
    return 1.0 / (1.0 + m)


def k_dense_scan(d, mu, nu, fp0, gp0, n=2_000_001, beta_max=50.0):
    betas = np.linspace(0.0, beta_max, n)
    phi = (d * mu * betas / (nu + d * betas) - gp0) / (fp0 + d * betas ** 2)
    return 1.0 / (1.0 + phi.max())


def logistic_theta_root(d, mu, nu, rho, r=1.0):
    """Root in (0, 1] of the mortality energy function for f = r s (1 - s), by bisection."""
    a = nu * nu * rho * rho / (2 * d * (mu + rho) ** 2)

    def theta(s):
        return a * s * s - r * (1.0 / 6.0 - s * s / 2.0 + s ** 3 / 3.0)

    if theta(1.0) == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if theta(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
