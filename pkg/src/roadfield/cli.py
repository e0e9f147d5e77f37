"""Command line front end: ``roadfield <command> --config FILE [--out DIR]``.

Every command reads one configuration file and writes CSV (or SVG) files into
the output directory.  Exit status is 0 on success, 2 for configuration errors
and 3 for numerical failures; failures also print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dispersion, geometry, simulator, stationary
from .config import ConfigError, RunConfig, parse_config, with_tol
from .model import ModelParams, RoadReaction

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SPEED_COLUMNS = ("d", "D", "mu", "nu", "q", "fp0", "gp0", "direction", "w_star", "at_kpp",
                 "beta_star", "alpha_star")
THRESHOLD_COLUMNS = ("d", "D", "mu", "nu", "q", "fp0", "gp0", "direction", "D_over_d", "margin",
                     "predicts_ck", "w_star", "at_kpp")
SIMULATE_COLUMNS = ("t", "x_front_plus", "x_front_minus", "u_max", "mass")
LIMIT_COLUMNS = ("d", "mu", "nu", "fp0", "gp0", "h", "k")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])


# --- speed rows (pure, picklable for the worker pool) ---------------------------

def speed_rows(point) -> list[tuple]:
    """CSV rows of critical_speed for one parameter point and its directions."""
    d, D, mu, nu, q, fp0, gp0, directions, tol = point
    params = ModelParams(d, D, mu, nu, q)
    rows = []
    for direction in directions:
        cs = dispersion.critical_speed(params, fp0, gp0, direction, tol=tol)
        w = cs.witness
        rows.append((d, D, mu, nu, q, fp0, gp0, direction, cs.w_star, cs.at_kpp,
                     None if w is None else w.beta, None if w is None else w.alpha))
    return rows


def sweep_points(cfg: RunConfig) -> list[tuple[float, float, RoadReaction]]:
    """(D, q, road reaction) triples in grid order; empty lists fall back to the config."""
    s = cfg.sweep
    Ds = s.D or (cfg.model.D,)
    qs = s.q or (cfg.model.q,)
    rhos = s.rho or (None,)
    if s.random > 0:
        rng = np.random.default_rng(s.seed)
        pts = []
        for _ in range(s.random):
            D = float(rng.uniform(min(Ds), max(Ds)))
            q = float(rng.uniform(min(qs), max(qs)))
            rho = None if rhos == (None,) else float(rng.uniform(min(rhos), max(rhos)))
            pts.append((D, q, rho))
    else:
        pts = list(itertools.product(Ds, qs, rhos))
    road = cfg.road_reaction()
    return [(D, q, road if rho is None else RoadReaction.mortality(rho)) for D, q, rho in pts]


# --- commands -------------------------------------------------------------------

def cmd_speed(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    m, f, g = cfg.model, cfg.field_reaction(), cfg.road_reaction()
    rows = speed_rows((m.d, m.D, m.mu, m.nu, m.q, f.f_prime_0, g.g_prime_0,
                       cfg.run.directions, cfg.run.tol))
    path = out / "speed.csv"
    write_csv(path, SPEED_COLUMNS, rows)
    return [path]


def cmd_sweep(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    m, f = cfg.model, cfg.field_reaction()
    points = [(m.d, D, m.mu, m.nu, q, f.f_prime_0, g.g_prime_0, cfg.run.directions, cfg.run.tol)
              for D, q, g in sweep_points(cfg)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(speed_rows, points, chunksize=max(1, len(points) // (4 * workers))))
    else:
        chunks = [speed_rows(p) for p in points]
    path = out / "sweep.csv"
    write_csv(path, SPEED_COLUMNS, itertools.chain.from_iterable(chunks))
    return [path]


def cmd_thresholds(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    m, f = cfg.model, cfg.field_reaction()
    rows = []
    for D, q, g in sweep_points(cfg):
        params = ModelParams(m.d, D, m.mu, m.nu, q)
        for direction in cfg.run.directions:
            margin = dispersion.threshold_margin(params, f.f_prime_0, g.g_prime_0, direction)
            cs = dispersion.critical_speed(params, f.f_prime_0, g.g_prime_0, direction, tol=cfg.run.tol)
            rows.append((m.d, D, m.mu, m.nu, q, f.f_prime_0, g.g_prime_0, direction, D / m.d, margin,
                         dispersion.threshold_predicts_ck(params, f.f_prime_0, g.g_prime_0, direction),
                         cs.w_star, cs.at_kpp))
    path = out / "thresholds.csv"
    write_csv(path, THRESHOLD_COLUMNS, rows)
    return [path]


def profile_class(prof: stationary.StationaryProfile) -> str:
    """Label of the sampled profile (forward shooting from U* is a saddle, so it is not re-run)."""
    if np.min(prof.V) <= 0.0:
        return stationary.HITS_ZERO
    if not prof.converged:
        return stationary.BLOWS_UP
    return stationary.POSITIVE


def solve_stationary(cfg: RunConfig) -> stationary.StationaryProfile:
    f, g = cfg.field_reaction(), cfg.road_reaction()
    if g.kind in ("zero", "mortality"):
        return stationary.stationary_mortality(cfg.model, f, g.rho)
    return stationary.find_Ustar(cfg.model, g, f)


def cmd_stationary(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    prof = solve_stationary(cfg)
    stride = max(1, int(round(cfg.run.profile_dy / (prof.y_grid[1] - prof.y_grid[0]))))
    path = out / "profile.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# U={_cell(prof.U)},V0={_cell(prof.V0)},V_prime_0={_cell(prof.V_prime_0)},"
                 f"classification={profile_class(prof)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("y", "V"))
        idx = np.arange(0, prof.y_grid.size, stride)
        if idx[-1] != prof.y_grid.size - 1:
            idx = np.append(idx, prof.y_grid.size - 1)
        for i in idx:
            w.writerow((_cell(prof.y_grid[i]), _cell(prof.V[i])))
    return [path]


def cmd_simulate(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    p, f, g = cfg.model, cfg.field_reaction(), cfg.road_reaction()
    grid = cfg.grid.resolved(p, f)
    ref = solve_stationary(cfg)
    extra = tuple(lv for lv in (0.1, 0.5, 0.9) if lv != cfg.run.level)
    state, series, snaps = simulator.run(p, f, g, grid, reference=ref, level=cfg.run.level,
                                         snapshot_times=cfg.run.snapshot_times, extra_levels=extra)
    path = out / "simulate.csv"
    write_csv(path, SIMULATE_COLUMNS, zip(series.times, series.front_x_plus, series.front_x_minus,
                                          series.u_max, series.mass))
    paths = [path]
    X, Y = np.meshgrid(grid.x, grid.y)
    for t, snap in sorted(snaps.items()):
        sp = out / f"snapshot_t{_cell(t)}.csv"
        write_csv(sp, ("x", "y", "v"), zip(X.ravel(), Y.ravel(), snap.v.ravel()))
        paths.append(sp)
    try:
        for lv, est in simulator.level_sensitivity(series, cfg.run.fit_window).items():
            print(f"level={_cell(lv)} w_emp_plus={_cell(est.w_plus)} w_emp_minus={_cell(est.w_minus)}")
    except ValueError as exc:
        print(f"speed estimate unavailable: {exc}", file=sys.stderr)
    err = simulator.profile_error(state, grid, ref, cfg.run.window)
    print(f"profile_error={_cell(err)}")
    return paths


def cmd_limits(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    p, f, g = cfg.model, cfg.field_reaction(), cfg.road_reaction()
    lc = dispersion.limit_constants(p, f.f_prime_0, g.g_prime_0)
    path = out / "limits.csv"
    write_csv(path, LIMIT_COLUMNS, [(p.d, p.mu, p.nu, f.f_prime_0, g.g_prime_0, lc.h, lc.k)])
    return [path]


def cmd_geometry(cfg: RunConfig, out: Path, workers: int = 1) -> list[Path]:
    p, f, g = cfg.model, cfg.field_reaction(), cfg.road_reaction()
    direction = cfg.run.directions[0]
    c = cfg.run.c
    if c is None:
        c = dispersion.critical_speed(p, f, g, direction, tol=cfg.run.tol).w_star
    elif c < 2.0 * math.sqrt(p.d * f.f_prime_0):
        raise ConfigError(f"c={c:g} is below the KPP speed", key="c")
    path = out / "geometry.svg"
    path.write_text(geometry.plot_geometry(p, f, g, c, direction), encoding="utf-8")
    return [path]


COMMANDS = {
    "speed": cmd_speed,
    "thresholds": cmd_thresholds,
    "stationary": cmd_stationary,
    "simulate": cmd_simulate,
    "limits": cmd_limits,
    "geometry": cmd_geometry,
    "sweep": cmd_sweep,
}


def _error(kind: str, code: int, message: str, **extra) -> int:
    payload = {"status": "error", "kind": kind, "exit_code": code, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roadfield", description="Road-field spreading speeds and simulations.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, type=Path, help="configuration file")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    ap.add_argument("--workers", type=int, default=1, help="worker processes for sweep")
    ap.add_argument("--tol", type=float, default=None, help="override [run] tol")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1", key="workers")
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be > 0", key="tol")
            cfg = with_tol(cfg, args.tol)
        args.out.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg, args.out, args.workers)
    except ConfigError as exc:
        return _error("config", EXIT_CONFIG, exc.message, line=exc.line, key=exc.key)
    except Exception as exc:  # any module failure is a numerical failure
        return _error("numerical", EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
