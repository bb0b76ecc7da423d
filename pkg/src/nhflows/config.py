"""Strict JSON configuration for scenario runs.

A config file is an object with the top-level keys ``scenario``,
``params``, ``integrator``, ``output`` and ``seed``.  Unknown keys at any
level are rejected with a ``ConfigError`` naming the key path, and values
must have the type of the corresponding default.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any

from .errors import ConfigError

TOP_LEVEL = ("scenario", "params", "integrator", "output", "seed")
DEFAULT_SEED = 42

INTEGRATOR_DEFAULTS: dict[str, Any] = {
    "dt": 1e-3,
    "t_final": 100.0,
    "stride": 100,
    "projection": False,
    "fd_step": 1e-5,
    "record_every": 100,
}

OUTPUT_DEFAULTS: dict[str, Any] = {
    "dir": "nhflows_out",
    "csv": True,
}


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_value(path: str, value, default) -> Any:
    """Validate ``value`` against the type of ``default``; returns a normalized copy."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean")
        return value
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if isinstance(default, float):
        if not _is_number(value):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        return _check_list(path, value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        return merge_strict(path, default, value)
    raise ConfigError(f"{path}: unsupported default type")


def _check_list(path: str, value: list) -> list:
    out = []
    for k, v in enumerate(value):
        if isinstance(v, list):
            out.append(_check_list(f"{path}[{k}]", v))
        elif _is_number(v):
            out.append(v)
        elif isinstance(v, str):
            out.append(v)
        else:
            raise ConfigError(f"{path}[{k}]: expected numbers, strings or nested lists")
    return out


def merge_strict(prefix: str, defaults: dict, given: dict) -> dict:
    """Overlay ``given`` on ``defaults``; unknown keys raise ``ConfigError``."""
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in defaults:
            raise ConfigError(f"{path}: unknown key")
        out[key] = _check_value(path, value, defaults[key])
    return out


def load_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def resolve_config(raw: dict | None, scenario_defaults: dict, required: tuple[str, ...],
                   strict_required: bool) -> dict:
    """Validate a raw config object against a scenario's defaults.

    With ``strict_required`` every key listed in ``required`` must appear in
    ``raw["params"]`` (used when a config file is supplied).
    """
    raw = {} if raw is None else raw
    for key in raw:
        if key not in TOP_LEVEL:
            raise ConfigError(f"{key}: unknown key")
    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("params: expected an object")
    if strict_required:
        for key in required:
            if key not in params_raw:
                raise ConfigError(f"params.{key}: required key is missing")
    integ_raw = raw.get("integrator", {})
    out_raw = raw.get("output", {})
    if not isinstance(integ_raw, dict):
        raise ConfigError("integrator: expected an object")
    if not isinstance(out_raw, dict):
        raise ConfigError("output: expected an object")
    seed = raw.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed: expected an integer")
    cfg = {
        "scenario": raw.get("scenario"),
        "params": merge_strict("params", scenario_defaults, params_raw),
        "integrator": merge_strict("integrator", INTEGRATOR_DEFAULTS, integ_raw),
        "output": merge_strict("output", OUTPUT_DEFAULTS, out_raw),
        "seed": seed,
    }
    ig = cfg["integrator"]
    if ig["dt"] <= 0 or ig["t_final"] < 0 or ig["stride"] < 1 or ig["record_every"] < 1 or ig["fd_step"] <= 0:
        raise ConfigError("integrator: need dt > 0, t_final >= 0, stride >= 1, record_every >= 1, fd_step > 0")
    return cfg
