"""Service configuration.

Precedence, highest first: explicit overrides (CLI flags), environment
variables (``TURNTALK_*``), a YAML file, built-in defaults. Bad YAML is
reported with its line number; unknown keys and wrong types are rejected
by name rather than silently ignored, because a typo like ``prot: 8710``
should fail loud at boot.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from ..errors import ConfigError

ENV_PREFIX = "TURNTALK_"


@dataclass
class ServiceConfig:
    port: int = 8710
    storage_dir: str = "./turntalk-data"
    providers: str = "mock"
    locale_source: str = "en"
    locale_target: str = "en"
    star_cap: int = 5
    repair_retries: int = 2
    symbol_threshold: float = 0.1
    mock_seed: int = 0
    max_upload_bytes: int = 10 * 1024 * 1024
    openai_api_key: str = ""
    openai_model: str = "gpt-4o"
    openai_base_url: str = "https://api.openai.com/v1"
    deepl_api_key: str = ""
    deepl_base_url: str = "https://api-free.deepl.com/v2"

    def storage_path(self) -> Path:
        return Path(self.storage_dir)


_INT_FIELDS = {"port", "star_cap", "repair_retries", "mock_seed", "max_upload_bytes"}
_FLOAT_FIELDS = {"symbol_threshold"}
_FIELD_NAMES = {f.name for f in fields(ServiceConfig)}


def _coerce(name: str, value: Any, origin: str) -> Any:
    try:
        if name in _INT_FIELDS:
            return int(value)
        if name in _FLOAT_FIELDS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{origin}: {name} must be a number, got {value!r}") from None
    if not isinstance(value, str):
        raise ConfigError(f"{origin}: {name} must be a string, got {value!r}")
    return value


def _load_yaml(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        parsed = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ConfigError(
                f"{path}, line {mark.line + 1}, column {mark.column + 1}: "
                f"{getattr(exc, 'problem', 'invalid YAML')}"
            ) from exc
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if parsed is None:
        return {}
    if not isinstance(parsed, dict):
        raise ConfigError(f"{path}: top level must be a mapping of settings")
    for key in parsed:
        if key not in _FIELD_NAMES:
            raise ConfigError(f"{path}: unknown setting {key!r}")
    return parsed


def load_config(
    config_file: Optional[str] = None,
    env: Optional[dict[str, str]] = None,
    **overrides: Any,
) -> ServiceConfig:
    """Merge defaults, file, environment, and explicit overrides."""
    merged: dict[str, Any] = {}
    if config_file:
        file_values = _load_yaml(Path(config_file))
        for key, value in file_values.items():
            merged[key] = _coerce(key, value, str(config_file))
    environ = os.environ if env is None else env
    for name in _FIELD_NAMES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in environ:
            merged[name] = _coerce(name, environ[env_key], f"environment {env_key}")
    for name, value in overrides.items():
        if name not in _FIELD_NAMES:
            raise ConfigError(f"unknown setting {name!r}")
        if value is not None:
            merged[name] = _coerce(name, value, f"option --{name.replace('_', '-')}")
    config = ServiceConfig(**merged)
    if config.providers not in ("mock", "live"):
        raise ConfigError(f"providers must be 'mock' or 'live', got {config.providers!r}")
    if config.port < 1 or config.port > 65535:
        raise ConfigError(f"port must be in 1..65535, got {config.port}")
    if config.repair_retries < 0:
        raise ConfigError("repair_retries must be >= 0")
    if config.star_cap < 1:
        raise ConfigError("star_cap must be >= 1")
    if config.max_upload_bytes < 1:
        raise ConfigError("max_upload_bytes must be >= 1")
    if config.providers == "live" and not config.openai_api_key:
        raise ConfigError("live providers need openai_api_key")
    return config
