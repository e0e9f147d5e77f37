"""Plain-text run configuration.

Format: ``key = value`` lines grouped under ``[section]`` headers, ``#`` starts a
comment.  Sections: model, field, road, grid, sweep, run.  Unknown sections or
keys are errors.  ``emit_config(parse_config(text))`` is the normal form of text.
"""

from __future__ import annotations

import math
import dataclasses
from dataclasses import dataclass, fields, replace

from .model import FieldReaction, ModelParams, RoadReaction
from .simulator import GridSpec


class ConfigError(ValueError):
    """Bad configuration; carries the offending line number and key when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line, self.key, self.message = line, key, message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


FIELD_KINDS = {"logistic": ("r",)}
ROAD_KINDS = {"zero": (), "mortality": ("rho",), "logistic": ("s", "kappa")}
REACTION_DEFAULTS = {"r": 1.0, "rho": 0.0, "s": 1.0, "kappa": 1.0}


@dataclass(frozen=True)
class ReactionSpec:
    kind: str
    params: tuple[tuple[str, float], ...] = ()

    def get(self, name: str, default: float | None = None) -> float | None:
        return dict(self.params).get(name, default)


@dataclass(frozen=True)
class SweepSpec:
    D: tuple[float, ...] = ()
    q: tuple[float, ...] = ()
    rho: tuple[float, ...] = ()
    random: int = 0  # >0: draw this many points uniformly in the box spanned by the lists
    seed: int = 0


@dataclass(frozen=True)
class RunOptions:
    direction: str = "1"  # "1", "-1" or "both"
    tol: float = 1e-8
    c: float | None = None  # geometry speed; None means w*
    level: float = 0.5
    fit_window: float = 0.5
    window: float = 20.0  # half-width for profile_error in simulate
    profile_dy: float = 0.01
    snapshot_times: tuple[float, ...] = ()

    @property
    def directions(self) -> tuple[int, ...]:
        return (1, -1) if self.direction == "both" else (int(self.direction),)


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    field: ReactionSpec = ReactionSpec("logistic", (("r", 1.0),))
    road: ReactionSpec = ReactionSpec("zero")
    grid: GridSpec = dataclasses.field(default_factory=GridSpec)
    sweep: SweepSpec = SweepSpec()
    run: RunOptions = RunOptions()

    def field_reaction(self) -> FieldReaction:
        return build_field(self.field)

    def road_reaction(self) -> RoadReaction:
        return build_road(self.road)


def build_field(spec: ReactionSpec) -> FieldReaction:
    if spec.kind == "logistic":
        return FieldReaction.logistic(spec.get("r", 1.0))
    raise ConfigError(f"unknown field reaction {spec.kind!r}", key="kind")


def build_road(spec: ReactionSpec) -> RoadReaction:
    if spec.kind == "zero":
        return RoadReaction.zero()
    if spec.kind == "mortality":
        return RoadReaction.mortality(spec.get("rho", 0.0))
    if spec.kind == "logistic":
        return RoadReaction.logistic(spec.get("s", 1.0), spec.get("kappa", 1.0))
    raise ConfigError(f"unknown road reaction {spec.kind!r}", key="kind")


# --- parsing --------------------------------------------------------------------

_MODEL_KEYS = ("d", "D", "mu", "nu", "q")
_GRID_KEYS = tuple(f.name for f in fields(GridSpec))
_SWEEP_KEYS = ("D", "q", "rho", "random", "seed")
_RUN_KEYS = tuple(f.name for f in fields(RunOptions))
_SECTIONS = ("model", "field", "road", "grid", "sweep", "run")


def _float(text: str, key: str, line: int) -> float:
    try:
        x = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line, key) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: value must be finite", line, key)
    return x


def _int(text: str, key: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line, key) from None


def _floats(text: str, key: str, line: int) -> tuple[float, ...]:
    text = text.strip()
    if text.startswith("linspace(") and text.endswith(")"):
        parts = [p.strip() for p in text[len("linspace("):-1].split(",")]
        if len(parts) != 3:
            raise ConfigError(f"{key}: linspace needs (start, stop, n)", line, key)
        a, b = _float(parts[0], key, line), _float(parts[1], key, line)
        n = _int(parts[2], key, line)
        if n < 1:
            raise ConfigError(f"{key}: linspace count must be >= 1", line, key)
        if n == 1:
            return (a,)
        return tuple(a + (b - a) * i / (n - 1) for i in range(n))
    if not text:
        return ()
    return tuple(_float(p.strip(), key, line) for p in text.split(","))


def _positive(value, key, line):
    if not value > 0:
        raise ConfigError(f"{key} must be > 0 (got {value:g})", line, key)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises ConfigError with line number and key."""
    raw: dict[str, dict[str, tuple[str, int]]] = {s: {} for s in _SECTIONS}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigError(f"malformed section header {body!r}", lineno)
            section = body[1:-1].strip()
            if section not in raw:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in body:
            raise ConfigError(f"expected key = value, got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if section is None:
            raise ConfigError(f"key {key!r} outside any section", lineno, key)
        if key in raw[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, key)
        raw[section][key] = (value, lineno)

    def check_keys(sec, allowed):
        for key, (_, ln) in raw[sec].items():
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", ln, key)

    # model
    check_keys("model", _MODEL_KEYS)
    m = {}
    for key in _MODEL_KEYS:
        if key not in raw["model"]:
            if key == "q":
                m[key] = 0.0
                continue
            raise ConfigError(f"missing key {key!r} in [model]", key=key)
        value, ln = raw["model"][key]
        m[key] = _float(value, key, ln)
        if key != "q":
            _positive(m[key], key, ln)
    model = ModelParams(**m)

    field_spec = _reaction(raw["field"], "field", FIELD_KINDS, "logistic")
    road_spec = _reaction(raw["road"], "road", ROAD_KINDS, "zero")

    # grid
    check_keys("grid", _GRID_KEYS)
    gkw = {}
    for key, (value, ln) in raw["grid"].items():
        gkw[key] = _float(value, key, ln)
        _positive(gkw[key], key, ln)
    grid = GridSpec(**gkw)

    # sweep
    check_keys("sweep", _SWEEP_KEYS)
    skw = {}
    for key, (value, ln) in raw["sweep"].items():
        if key in ("random", "seed"):
            skw[key] = _int(value, key, ln)
            if skw[key] < 0:
                raise ConfigError(f"{key} must be >= 0", ln, key)
        else:
            skw[key] = _floats(value, key, ln)
            if key == "D":
                for x in skw[key]:
                    _positive(x, key, ln)
            if key == "rho" and any(x < 0 for x in skw[key]):
                raise ConfigError("rho must be >= 0", ln, key)
    sweep = SweepSpec(**skw)

    # run
    check_keys("run", _RUN_KEYS)
    rkw = {}
    for key, (value, ln) in raw["run"].items():
        if key == "direction":
            if value not in ("1", "-1", "+1", "both"):
                raise ConfigError("direction must be 1, -1 or both", ln, key)
            rkw[key] = "1" if value == "+1" else value
        elif key == "snapshot_times":
            rkw[key] = _floats(value, key, ln)
        else:
            rkw[key] = _float(value, key, ln)
            if key in ("tol", "c", "window", "profile_dy"):
                _positive(rkw[key], key, ln)
            if key in ("level", "fit_window") and not 0 < rkw[key] < 1 + (key == "fit_window"):
                raise ConfigError(f"{key} out of range", ln, key)
    run = RunOptions(**rkw)
    return RunConfig(model, field_spec, road_spec, grid, sweep, run)


def _reaction(entries, sec, kinds, default_kind) -> ReactionSpec:
    kind, kind_line = entries.get("kind", (default_kind, None))
    if kind not in kinds:
        raise ConfigError(f"unknown {sec} reaction {kind!r}", kind_line, "kind")
    params = []
    for key, (value, ln) in entries.items():
        if key == "kind":
            continue
        if key not in kinds[kind]:
            raise ConfigError(f"unknown key {key!r} for {sec} reaction {kind!r}", ln, key)
        x = _float(value, key, ln)
        if key == "rho":
            if x < 0:
                raise ConfigError("rho must be >= 0", ln, key)
        else:
            _positive(x, key, ln)
        params.append((key, x))
    given = dict(params)
    return ReactionSpec(kind, tuple((k, given.get(k, REACTION_DEFAULTS[k])) for k in kinds[kind]))


# --- emitting -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def emit_config(cfg: RunConfig) -> str:
    """Canonical text of cfg; parse_config(emit_config(cfg)) == cfg."""
    out = ["[model]"]
    out += [f"{k} = {_fmt(getattr(cfg.model, k))}" for k in _MODEL_KEYS]
    for name, spec in (("field", cfg.field), ("road", cfg.road)):
        out += ["", f"[{name}]", f"kind = {spec.kind}"]
        out += [f"{k} = {_fmt(v)}" for k, v in spec.params]
    out += ["", "[grid]"]
    for k in _GRID_KEYS:
        v = getattr(cfg.grid, k)
        if v is not None:
            out.append(f"{k} = {_fmt(v)}")
    out += ["", "[sweep]"]
    for k in ("D", "q", "rho"):
        v = getattr(cfg.sweep, k)
        if v:
            out.append(f"{k} = " + ", ".join(_fmt(x) for x in v))
    out += [f"random = {cfg.sweep.random}", f"seed = {cfg.sweep.seed}"]
    out += ["", "[run]", f"direction = {cfg.run.direction}"]
    for k in _RUN_KEYS[1:]:
        v = getattr(cfg.run, k)
        if k == "snapshot_times":
            if v:
                out.append(f"{k} = " + ", ".join(_fmt(x) for x in v))
        elif v is not None:
            out.append(f"{k} = {_fmt(v)}")
    return "\n".join(out) + "\n"


def normalize(text: str) -> str:
    return emit_config(parse_config(text))


def with_tol(cfg: RunConfig, tol: float) -> RunConfig:
    return replace(cfg, run=replace(cfg.run, tol=tol))
