"""Run configuration: a flat YAML mapping plus command-line overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .core import ArraySpec, Ports, SpecError, validate_spec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """All energies are offsets from omega_c in units of g.

    ``g`` is the absolute coupling in MHz and is only needed with
    ``unit_MHz``.  ``kappa_over_g`` sets both ports unless the per-port keys
    are given.
    """

    N: int = 3
    J_over_g: float = 0.1
    J_over_g_list: tuple = ()
    g: float | None = None
    qubit_detuning_over_g: float = 0.0
    kappa_over_g: float = 1.0
    kappa_left_over_g: float | None = None
    kappa_right_over_g: float | None = None
    delta_min: float = -1.5
    delta_max: float = 1.5
    points: int = 3001
    unit_MHz: bool = False
    method: str = "dense"
    branch: str = "both"

    @property
    def kappa_left(self) -> float:
        return self.kappa_over_g if self.kappa_left_over_g is None else self.kappa_left_over_g

    @property
    def kappa_right(self) -> float:
        return self.kappa_over_g if self.kappa_right_over_g is None else self.kappa_right_over_g

    def array_spec(self, j_over_g: float | None = None) -> ArraySpec:
        j = self.J_over_g if j_over_g is None else j_over_g
        return ArraySpec(self.N, j, 1.0, 0.0, self.qubit_detuning_over_g)

    def ports(self) -> Ports:
        return Ports.from_kappa(self.kappa_left, self.kappa_right)

    def j_values(self) -> list[float]:
        return list(self.J_over_g_list) if self.J_over_g_list else [self.J_over_g]

    def grid(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.points)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT = {"N", "points"}
_FLOAT = {"J_over_g", "qubit_detuning_over_g", "kappa_over_g", "delta_min", "delta_max"}
_OPT_FLOAT = {"g", "kappa_left_over_g", "kappa_right_over_g"}
_CHOICES = {"method": ("dense", "secular"), "branch": ("both", "B-", "B+")}


def config_keys() -> list[str]:
    return list(_FIELDS)


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in _INT:
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        if key in _FLOAT:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if key in _OPT_FLOAT:
            return None if value is None else float(value)
        if key == "unit_MHz":
            if not isinstance(value, bool):
                raise ValueError
            return value
        if key == "J_over_g_list":
            if isinstance(value, str):
                value = [v for v in value.replace(",", " ").split() if v]
            if isinstance(value, (int, float)):
                value = [value]
            return tuple(float(v) for v in value)
        if key in _CHOICES:
            value = str(value)
            if value not in _CHOICES[key]:
                raise ConfigError(f"{key} must be one of {', '.join(_CHOICES[key])}")
            return value
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    raise ConfigError(f"unknown config key: {key}")


def _validate(cfg: RunConfig) -> RunConfig:
    for key in ("J_over_g", "qubit_detuning_over_g", "kappa_over_g", "delta_min", "delta_max"):
        if not math.isfinite(getattr(cfg, key)):
            raise ConfigError(f"{key} must be finite")
    if cfg.J_over_g < 0:
        raise ConfigError("J_over_g must be non-negative")
    try:
        validate_spec(cfg.array_spec())
    except SpecError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.kappa_left < 0 or cfg.kappa_right < 0:
        raise ConfigError("kappa_over_g must be non-negative")
    if cfg.points < 2:
        raise ConfigError("points must be at least 2")
    if not cfg.delta_max > cfg.delta_min:
        raise ConfigError("delta_max must exceed delta_min")
    js = cfg.J_over_g_list
    if js and (any(not (v > 0 and math.isfinite(v)) for v in js)
               or any(b < a for a, b in zip(js, js[1:]))):
        raise ConfigError("J_over_g_list must be ascending positive values")
    if cfg.unit_MHz and (cfg.g is None or not cfg.g > 0):
        raise ConfigError("g (in MHz) is required when unit_MHz is set")
    return cfg


def build_config(values: dict) -> RunConfig:
    clean = {}
    for key, value in values.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key: {key}")
        clean[key] = _coerce(key, value)
    return _validate(RunConfig(**clean))


def load_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a flat key-value mapping")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config key {key} must not be nested")
    return data


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """File values first, then ``overrides`` on top."""
    values = load_file(path) if path is not None else {}
    values.update(overrides or {})
    return build_config(values)


def emit_config(cfg: RunConfig) -> str:
    data = dataclasses.asdict(cfg)
    data["J_over_g_list"] = list(cfg.J_over_g_list)
    return yaml.safe_dump(data, sort_keys=False)
