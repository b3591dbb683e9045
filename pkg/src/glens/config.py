"""Run configuration with layered precedence.

Resolution order for every knob: command-line flag, then a GLENS_-prefixed
environment variable, then the JSON config file (--config or GLENS_CONFIG),
then the built-in default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError

ENV_PREFIX = "GLENS_"

DEFAULT_THRESHOLDS = [0.05, 0.10, 0.20, 0.30]


@dataclass
class RunConfig:
    tau: float = 0.05
    alpha: float = 0.8
    pss_c: float = 4.5
    normalize_input: bool = True
    seed: int = 0
    template: str = "Click the {name} icon."
    thresholds: list[float] = field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    strict_format: bool = True
    margin: float = 0.02
    scale_min: float = 0.04
    scale_max: float = 0.10
    n_icons: int = 6

    def validate(self) -> None:
        if self.tau < 0:
            raise ConfigError(f"tau must be >= 0, got {self.tau}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0,1), got {self.alpha}")
        if self.pss_c <= 0:
            raise ConfigError(f"pss_c must be > 0, got {self.pss_c}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ConfigError(f"thresholds must be strictly ascending: {self.thresholds}")
        if not 0 < self.scale_min <= self.scale_max < 1:
            raise ConfigError(
                f"scale range invalid: [{self.scale_min}, {self.scale_max}]"
            )
        if self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.n_icons < 1:
            raise ConfigError(f"n_icons must be >= 1, got {self.n_icons}")
        if "{name}" not in self.template:
            raise ConfigError(f"template {self.template!r} has no {{name}} slot")


_FIELD_NAMES = {f.name for f in fields(RunConfig)}
_BOOL_FIELDS = {"normalize_input", "strict_format"}
_INT_FIELDS = {"seed", "n_icons"}
_STR_FIELDS = {"template"}


def _coerce(name: str, value: Any) -> Any:
    try:
        if name in _BOOL_FIELDS:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if name == "thresholds":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if name in _INT_FIELDS:
            return int(value)
        if name in _STR_FIELDS:
            return str(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r} ({exc})") from exc


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    return data


def resolve_config(
    cli_values: Optional[dict] = None,
    config_path: Optional[str] = None,
    env: Optional[dict] = None,
) -> RunConfig:
    """Build a validated RunConfig from the four precedence layers.

    Args:
        cli_values: flag values; None entries mean "not given".
        config_path: explicit --config path (falls back to GLENS_CONFIG).
        env: environment mapping; defaults to os.environ.
    """
    env = dict(os.environ if env is None else env)
    cli_values = {k: v for k, v in (cli_values or {}).items() if v is not None}

    path = config_path or env.get(ENV_PREFIX + "CONFIG")
    file_values = load_config_file(path) if path else {}

    merged: dict[str, Any] = {}
    for name in sorted(_FIELD_NAMES):
        if name in cli_values:
            merged[name] = _coerce(name, cli_values[name])
        elif (ENV_PREFIX + name.upper()) in env:
            merged[name] = _coerce(name, env[ENV_PREFIX + name.upper()])
        elif name in file_values:
            merged[name] = _coerce(name, file_values[name])

    cfg = RunConfig(**merged)
    cfg.validate()
    return cfg
