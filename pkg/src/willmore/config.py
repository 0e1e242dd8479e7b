"""Line-based run configuration.

A config is plain `key = value` text with `#` comments and
comma-separated lists.  parse_config and print_config round-trip:
parse_config(print_config(cfg)) == cfg for every valid cfg.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .providers import make_provider, provider_names

COMMANDS = ("curvature", "expand", "solve", "landscape", "foliate", "hawking")

# keys every command accepts
_GLOBAL_KEYS = {"command", "metric", "L", "eps", "eps_grid", "P", "radii",
                "tol", "grad_tol", "pin_center", "seed", "output_dir"}
# metric parameters, forwarded to the provider factory
_METRIC_KEYS = {"R", "m", "eta", "sigma", "eta1", "eta2", "center"}

_REQUIRED = {
    "curvature": ("P",),
    "solve": ("eps", "P"),
    "expand": ("eps_grid", "P"),
    "landscape": ("eps", "P"),
    "foliate": ("eps_grid", "P"),
    "hawking": ("radii",),
}


@dataclass
class RunConfig:
    command: str
    metric: str
    metric_params: dict = field(default_factory=dict)
    L: int = 16
    eps: float | None = None
    eps_grid: tuple = ()
    P: tuple | None = None
    radii: tuple = ()
    tol: float | None = None
    grad_tol: float | None = None
    pin_center: bool = False
    seed: int | None = None
    output_dir: str | None = None


def _float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw}") from None


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw}") from None


def _float_list(key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    return tuple(_float(key, p) for p in parts)


def _triple(key, raw):
    vals = _float_list(key, raw)
    if len(vals) != 3:
        raise ConfigError(f"{key} needs three comma-separated values, "
                          f"got {len(vals)}")
    return vals


def _bool(key, raw):
    low = raw.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"invalid value for {key}: {raw}")


def parse_config(text):
    """Parse config text into a validated RunConfig."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno} is not `key = value`: {line.strip()}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _GLOBAL_KEYS and key not in _METRIC_KEYS:
            raise ConfigError(f"unknown key: {key}")
        raw[key] = value

    if "command" not in raw:
        raise ConfigError("config requires command")
    command = raw.pop("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command: {command}")
    if "metric" not in raw:
        raise ConfigError("config requires metric")
    metric = raw.pop("metric")
    if metric not in provider_names():
        raise ConfigError(f"unknown metric: {metric}")

    cfg = RunConfig(command=command, metric=metric)
    for key, value in raw.items():
        if key in _METRIC_KEYS:
            if key == "center":
                cfg.metric_params[key] = _triple(key, value)
            else:
                cfg.metric_params[key] = _float(key, value)
        elif key == "L":
            cfg.L = _int(key, value)
        elif key == "eps":
            cfg.eps = _float(key, value) if value else None
        elif key == "eps_grid":
            cfg.eps_grid = _float_list(key, value)
        elif key == "P":
            cfg.P = _triple(key, value)
        elif key == "radii":
            cfg.radii = _float_list(key, value)
        elif key in ("tol", "grad_tol"):
            setattr(cfg, key, _float(key, value))
        elif key == "pin_center":
            cfg.pin_center = _bool(key, value)
        elif key == "seed":
            cfg.seed = _int(key, value)
        elif key == "output_dir":
            cfg.output_dir = value

    missing = [k for k in _REQUIRED[command]
               if not _present(cfg, k)]
    if missing:
        raise ConfigError(f"{command} requires {', '.join(missing)}")

    if cfg.L < 4:
        raise ConfigError(f"L must be at least 4, got {cfg.L}")
    for e in ((cfg.eps,) if cfg.eps is not None else ()) + cfg.eps_grid:
        if not 0.0 < e <= 0.5:
            raise ConfigError(f"eps must lie in (0, 0.5], got {e:g}")
    for r in cfg.radii:
        if r <= 0.0:
            raise ConfigError(f"radii must be positive, got {r:g}")
    return cfg


def _present(cfg, key):
    v = getattr(cfg, key)
    return v is not None and v != ()


def _fmt(v):
    return format(float(v), ".17g")


def print_config(cfg):
    """Canonical text form; parses back to an equal RunConfig."""
    lines = [f"command = {cfg.command}", f"metric = {cfg.metric}"]
    for k in sorted(cfg.metric_params):
        v = cfg.metric_params[k]
        if k == "center":
            lines.append(f"{k} = " + ", ".join(_fmt(x) for x in v))
        else:
            lines.append(f"{k} = {_fmt(v)}")
    lines.append(f"L = {cfg.L}")
    if cfg.eps is not None:
        lines.append(f"eps = {_fmt(cfg.eps)}")
    if cfg.eps_grid:
        lines.append("eps_grid = " + ", ".join(_fmt(e) for e in cfg.eps_grid))
    if cfg.P is not None:
        lines.append("P = " + ", ".join(_fmt(x) for x in cfg.P))
    if cfg.radii:
        lines.append("radii = " + ", ".join(_fmt(r) for r in cfg.radii))
    if cfg.tol is not None:
        lines.append(f"tol = {_fmt(cfg.tol)}")
    if cfg.grad_tol is not None:
        lines.append(f"grad_tol = {_fmt(cfg.grad_tol)}")
    if cfg.pin_center:
        lines.append("pin_center = true")
    if cfg.seed is not None:
        lines.append(f"seed = {cfg.seed}")
    if cfg.output_dir is not None:
        lines.append(f"output_dir = {cfg.output_dir}")
    return "\n".join(lines) + "\n"


def build_provider(cfg):
    """Construct the metric provider a config names."""
    return make_provider(cfg.metric, **cfg.metric_params)
