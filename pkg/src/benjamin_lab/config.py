"""Flat ``key = value`` run configuration with a schema per subcommand."""

from __future__ import annotations

from typing import Callable, Dict, Tuple

__all__ = ["ConfigError", "SCHEMAS", "REQUIRED", "parse_config", "load_config"]


class ConfigError(ValueError):
    pass


class _Required:
    def __repr__(self):
        return "REQUIRED"


REQUIRED = _Required()


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt(conv: Callable) -> Callable:
    def parse(text: str):
        return None if text.lower() in ("none", "") else conv(text)
    return parse


def _param(text: str):
    try:
        return float(text)
    except ValueError:
        return text


Field = Tuple[Callable, object]

_GRID: Dict[str, Field] = {"grid.n": (int, REQUIRED), "grid.length": (float, REQUIRED)}
_SOLVER: Dict[str, Field] = {
    "solver.dt": (float, REQUIRED),
    "solver.t_final": (float, REQUIRED),
    "solver.scheme": (str, "IF_RK4"),
    "solver.dealias": (str, "two_thirds"),
    "solver.model": (str, "full"),
    "solver.snapshot_stride": (int, 1),
    "solver.boundary_tol": (_opt(float), 1e-10),
}
_INITIAL: Dict[str, Field] = {"initial.kind": (str, REQUIRED)}
_COMMON: Dict[str, Field] = {"output.dir": (str, "out"), "seed": (int, 0)}


def _without(d: dict, *keys) -> dict:
    return {k: v for k, v in d.items() if k not in keys}


SCHEMAS: Dict[str, Dict[str, Field]] = {
    "solve": {**_GRID, **_SOLVER, **_INITIAL, **_COMMON,
              "check.linear_exactness": (_bool, False),
              "check.convergence": (_bool, False)},
    "conservation": {**_GRID, **_SOLVER, **_INITIAL, **_COMMON,
                     "conservation.first_moment_law": (_bool, True)},
    "tstar": {**_GRID, **_without(_SOLVER, "solver.t_final", "solver.model", "solver.snapshot_stride"),
              **_INITIAL, **_COMMON,
              "tstar.snapshots": (int, 12),
              "tstar.window_x1": (_opt(float), None),
              "tstar.window_x2": (_opt(float), None),
              "tstar.side": (str, "right"),
              "tstar.oracle_points": (int, 8),
              "tstar.nonlinear": (_bool, True),
              "tstar.nonlinear_dt": (_opt(float), None)},
    "pair": {**_GRID, **_SOLVER, **_INITIAL, **_COMMON,
             "pair.matched": (_bool, True),
             "pair.norm_gap": (float, 0.1),
             "pair.truncation_N": (float, 20.0),
             "pair.frozen_ratio": (_opt(float), None)},
    "bounds": {**_COMMON,
               "bounds.n": (int, 2048),
               "bounds.length": (float, 64.0),
               "bounds.x_samples": (int, 41),
               "bounds.df_n": (int, 2048),
               "bounds.refine": (_bool, True),
               "bounds.frozen": (str, "packaged"),
               "bounds.stein": (_bool, True)},
    "symbolic-verify": {**_COMMON,
                        "symbolic.transcriptions": (_opt(str), None),
                        "symbolic.allowlist": (_opt(str), None)},
    "uniqueness-cert": {**_GRID, **_SOLVER, **_INITIAL, **_COMMON,
                        "cert.interval_a": (float, -2.0),
                        "cert.interval_b": (float, 2.0),
                        "cert.bump_center": (float, 8.0),
                        "cert.bump_width": (float, 3.0),
                        "cert.bump_amplitude": (float, 0.1)},
}

PARAM_PREFIX = "initial.param."


def parse_config(text: str, subcommand: str, source: str = "<config>") -> dict:
    """Typed values for every schema key (defaults filled in) plus initial.param.* entries."""
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    schema = SCHEMAS[subcommand]
    raw: Dict[str, Tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)
    out = {}
    for key, (value, lineno) in raw.items():
        if key.startswith(PARAM_PREFIX) and "initial.kind" in schema:
            out[key] = _param(value)
            continue
        if key not in schema:
            valid = sorted(schema) + ([PARAM_PREFIX + "*"] if "initial.kind" in schema else [])
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for {subcommand}; "
                              f"valid keys: {', '.join(valid)}")
        conv = schema[key][0]
        try:
            out[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    for key, (_, default) in schema.items():
        if key in out:
            continue
        if default is REQUIRED:
            raise ConfigError(f"{source}: missing required key {key!r}")
        out[key] = default
    return out


def load_config(path, subcommand: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text, subcommand, str(path))


def initial_params(cfg: dict) -> dict:
    return {k[len(PARAM_PREFIX):]: v for k, v in cfg.items() if k.startswith(PARAM_PREFIX)}


def section(cfg: dict, prefix: str) -> dict:
    """Entries under ``prefix.`` with the prefix stripped."""
    p = prefix + "."
    return {k[len(p):]: v for k, v in cfg.items() if k.startswith(p)}
