"""Compiled inner loops for polynomial reactions (all built-in reactions are)."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def poly_eval(coeffs, x):
    acc = 0.0
    for i in range(coeffs.size - 1, -1, -1):
        acc = acc * x + coeffs[i]
    return acc


@njit(cache=True)
def rk4_classify(V0, Vp0, inv_d, coeffs, y_max, dy, blowup_cap):
    """Classify trajectories of V'' = -f(V)/d: 0 positive, 1 hits zero, 2 blows up."""
    n = V0.size
    code = np.zeros(n, dtype=np.int64)
    event = np.full(n, np.nan)
    n_steps = int(np.ceil(y_max / dy))
    h = dy
    for k in range(n):
        v = V0[k]
        w = Vp0[k]
        if v <= 0.0:
            code[k] = 1
            event[k] = 0.0
            continue
        for step in range(n_steps):
            k1v = w
            k1w = -inv_d * poly_eval(coeffs, v)
            k2v = w + 0.5 * h * k1w
            k2w = -inv_d * poly_eval(coeffs, v + 0.5 * h * k1v)
            k3v = w + 0.5 * h * k2w
            k3w = -inv_d * poly_eval(coeffs, v + 0.5 * h * k2v)
            k4v = w + h * k3w
            k4w = -inv_d * poly_eval(coeffs, v + h * k3v)
            v_new = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            w_new = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            y_new = (step + 1) * h
            if v_new <= 0.0:
                code[k] = 1
                event[k] = y_new - h + h * v / (v - v_new)
                break
            if (v_new > 1.0 and w_new > 0.0) or v_new > blowup_cap:
                code[k] = 2
                event[k] = y_new
                break
            v = v_new
            w = w_new
    return code, event


def quadratic_coeffs(poly) -> np.ndarray:
    """Pad ascending coefficients of a polynomial of degree <= 2 to length 3."""
    if len(poly) > 3:
        raise ValueError("stencil kernel handles polynomials of degree <= 2")
    out = np.zeros(3)
    out[:len(poly)] = poly
    return out


@njit(cache=True)
def explicit_step(u, v, out_u, out_v, dt, dx, dy, d, D, mu, nu, q, f_coeffs, g_coeffs):
    """One forward-Euler step of the road-field scheme (see simulator.step).

    Reactions are quadratics given by 3 ascending coefficients.
    """
    ny, nx = v.shape
    cx = D / (dx * dx)
    ax = d / (dx * dx)
    ay = d / (dy * dy)
    robin = 2.0 / dy
    f0, f1, f2 = f_coeffs[0], f_coeffs[1], f_coeffs[2]
    g0, g1, g2 = g_coeffs[0], g_coeffs[1], g_coeffs[2]
    qdx = q / dx
    for i in range(nx):
        il = i - 1 if i > 0 else 1
        ir = i + 1 if i < nx - 1 else nx - 2
        ui = u[i]
        lap = cx * (u[il] - 2.0 * ui + u[ir])
        if q > 0.0:
            adv = qdx * (ui - u[il])
        else:
            adv = qdx * (u[ir] - ui)
        v0 = v[0, i]
        exch = mu * ui - nu * v0
        out_u[i] = ui + dt * (lap - adv - exch + (g0 + ui * (g1 + ui * g2)))
        # y = 0 row: ghost value from -d v_y = mu u - nu v
        lap_v = ax * (v[0, il] - 2.0 * v0 + v[0, ir]) + ay * (2.0 * v[1, i] - 2.0 * v0) + robin * exch
        out_v[0, i] = v0 + dt * (lap_v + (f0 + v0 * (f1 + v0 * f2)))
    for j in range(1, ny):
        rd = v[j - 1]
        rc = v[j]
        ru = v[j + 1] if j < ny - 1 else v[ny - 2]
        ro = out_v[j]
        for i in range(1, nx - 1):
            vc = rc[i]
            lap_v = ax * (rc[i - 1] - 2.0 * vc + rc[i + 1]) + ay * (rd[i] - 2.0 * vc + ru[i])
            ro[i] = vc + dt * (lap_v + (f0 + vc * (f1 + vc * f2)))
        for i in (0, nx - 1):
            il = i - 1 if i > 0 else 1
            ir = i + 1 if i < nx - 1 else nx - 2
            vc = rc[i]
            lap_v = ax * (rc[il] - 2.0 * vc + rc[ir]) + ay * (rd[i] - 2.0 * vc + ru[i])
            ro[i] = vc + dt * (lap_v + (f0 + vc * (f1 + vc * f2)))
