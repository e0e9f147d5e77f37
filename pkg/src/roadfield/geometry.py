"""SVG picture of the road curves, the field circle and their overlap at a speed c."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .dispersion import (_circle_bounds, _fp0, _gp0, _sigma_bounds, beta_lower, critical_speed,
                         real_roots_exist)
from .model import ModelParams, kpp_speed

WIDTH, HEIGHT, PAD = 640, 480, 50


def _segments(mask: np.ndarray):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    ends = np.concatenate((idx[breaks], [idx[-1]]))
    return list(zip(starts, ends + 1))


def plot_geometry(params: ModelParams, f, g, c: float, direction: int = 1, n: int = 801) -> str:
    """Return a standalone SVG document with Sigma+/-, Gamma and the overlap shaded."""
    p = params.oriented(direction)
    fp0, gp0 = _fp0(f), _gp0(g)
    c_k = kpp_speed(p.d, fp0)
    if c < c_k:
        raise ValueError(f"speed {c} below the KPP speed {c_k}")
    r = math.sqrt(c * c - c_k * c_k) / (2 * p.d)
    centre = c / (2 * p.d)
    has_sigma = real_roots_exist(p, gp0, c)
    b_low = beta_lower(p, gp0, c) if has_sigma else -r
    b_min = min(-r, b_low) - 0.1 * (r + 1.0)
    b_max = max(r, 1.0) * 1.6 + 0.2
    b_min = max(b_min, -p.nu / p.d)
    a_max = max(centre + r, 1e-3) * 1.3

    def sx(b):
        return PAD + (np.asarray(b) - b_min) / (b_max - b_min) * (WIDTH - 2 * PAD)

    def sy(a):
        return HEIGHT - PAD - np.asarray(a) / a_max * (HEIGHT - 2 * PAD)

    def polyline(bs, as_, cls):
        keep = np.isfinite(as_) & (as_ >= -0.05 * a_max) & (as_ <= 1.05 * a_max)
        out = []
        for s, e in _segments(keep):
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(sx(bs[s:e]), sy(as_[s:e])))
            out.append(f'<polyline class="{cls}" points="{pts}" fill="none"/>')
        return out

    body = []
    body.append(f'<line class="axis" x1="{sx(b_min):.2f}" y1="{sy(0):.2f}" x2="{sx(b_max):.2f}" y2="{sy(0):.2f}"/>')
    body.append(f'<line class="axis" x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(0):.2f}" y2="{sy(a_max):.2f}"/>')

    overlap_cells = 0
    if has_sigma:
        bs = np.linspace(max(b_low, b_min), b_max, n)
        lo, hi = _sigma_bounds(p, gp0, c, bs)
        body.append('<g id="sigma-plus" stroke="#1f77b4">')
        body += polyline(bs, hi, "sigma-plus")
        body.append('</g><g id="sigma-minus" stroke="#2ca02c">')
        body += polyline(bs, lo, "sigma-minus")
        body.append('</g>')

    th = np.linspace(0, 2 * math.pi, n)
    cb, ca = r * np.sin(th), centre + r * np.cos(th)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(sx(cb), sy(ca)))
    body.append(f'<g id="gamma" stroke="#d62728"><polygon class="gamma" points="{pts}" fill="none"/></g>')

    body.append('<g id="overlap" fill="#ff7f0e" fill-opacity="0.5" stroke="none">')
    if has_sigma and r > 0:
        bs = np.linspace(max(b_low, -r), r, n)
        s_lo, s_hi = _sigma_bounds(p, gp0, c, bs)
        g_lo, g_hi = _circle_bounds(p, fp0, c, bs)
        lo = np.maximum(s_lo, g_lo)
        hi = np.minimum(s_hi, g_hi)
        ok = np.isfinite(lo) & np.isfinite(hi) & (lo <= hi)
        for s, e in _segments(ok):
            xs = np.concatenate((bs[s:e], bs[s:e][::-1]))
            ys = np.concatenate((lo[s:e], hi[s:e][::-1]))
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(sx(xs), sy(ys)))
            body.append(f'<polygon class="overlap" points="{pts}"/>')
            overlap_cells += e - s
    body.append('</g>')

    cs = critical_speed(params, fp0, gp0, direction)
    label = [f"c = {c:.6g}", f"w* = {cs.w_star:.6g}", f"c_K = {c_k:.6g}"]
    if cs.witness is not None:
        w = cs.witness
        gamma = p.mu / (p.nu + p.d * w.beta)
        label.append(f"(beta*, alpha*) = ({w.beta:.4g}, {w.alpha:.4g}), gamma* = {gamma:.4g}")
        if abs(c - cs.w_star) <= 1e-6 * max(1.0, c):
            body.append(f'<circle id="witness" cx="{sx(w.beta):.2f}" cy="{sy(w.alpha):.2f}" r="4" fill="black"/>')
    for k, text in enumerate(label):
        body.append(f'<text x="{PAD}" y="{20 + 16 * k}" font-size="13">{escape(text)}</text>')

    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" data-overlap-samples="{overlap_cells}">\n'
            f'<title>road/field dispersion geometry at c={c:.6g}</title>\n'
            '<style>polyline,polygon.gamma{stroke-width:2} .axis{stroke:#888;stroke-width:1}</style>\n')
    return head + "\n".join(body) + "\n</svg>\n"
