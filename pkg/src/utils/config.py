"""Configuration loader for settings, environment variables, and run documents."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.engine.errors import ConfigError

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent
CONFIG_DIR = PROJECT_ROOT / "config"
DATA_DIR = PROJECT_ROOT / "data"

# Load .env file
load_dotenv(PROJECT_ROOT / ".env")


class EnvSettings(BaseSettings):
    """Process-level overrides read from FREQLENS_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="FREQLENS_", extra="ignore")

    threads: int | None = None
    log_level: str = "INFO"
    output_dir: Path | None = None


def get_env_settings() -> EnvSettings:
    """Read FREQLENS_* variables; a malformed value is a ConfigError naming the variable."""
    try:
        return EnvSettings()
    except ValidationError as e:
        errors = e.errors()
        name = str(errors[0]["loc"][0]).upper() if errors and errors[0].get("loc") else "SETTINGS"
        raise ConfigError(f"FREQLENS_{name}", _locate_field(errors)) from e


def load_yaml(file_path: Path) -> dict:
    """Load a YAML configuration file."""
    with open(file_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def load_settings() -> dict:
    """Load the main settings.yaml configuration."""
    return load_yaml(CONFIG_DIR / "settings.yaml")


def default_scale_grid() -> list[float]:
    """The B/M grid {0.0, step, ..., 1.0}; the all-pass row is appended by the sweeps."""
    step = float(load_settings().get("sweep", {}).get("scale_step", 0.05))
    count = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(count + 1)]


def resolve_threads(flag: int | None = None, configured: int | None = None) -> int:
    """--threads flag, then the run document, then FREQLENS_THREADS, then 1."""
    for value in (flag, configured, get_env_settings().threads):
        if value is not None:
            if value < 1:
                raise ConfigError("threads", f"must be >= 1, got {value}")
            return value
    return 1


def _locate_field(errors: list[dict[str, Any]]) -> str:
    parts = []
    for err in errors:
        loc = ".".join(str(p) for p in err.get("loc", ()))
        parts.append(f"{loc or '<root>'}: {err.get('msg', 'invalid')}")
    return "; ".join(parts)


def load_run_config(path: Path, overrides: dict[str, Any] | None = None):
    """Read, override, and validate a JSON run document.

    Syntax errors report the JSON line/column; validation errors report the
    dotted field path. CLI overrides are applied before validation.
    """
    from src.harness.models import RunConfig

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e

    if not isinstance(raw, dict):
        raise ConfigError("config", f"{path}: top-level value must be an object")

    env_out = get_env_settings().output_dir
    if env_out is not None and "output_dir" not in raw:
        raw["output_dir"] = str(env_out)

    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        errors = e.errors()
        field = ".".join(str(p) for p in errors[0].get("loc", ())) if errors else "config"
        raise ConfigError(field or "config", _locate_field(errors)) from e


def get_logs_dir() -> Path:
    """Get the logs directory path, creating it if needed."""
    path = DATA_DIR / "logs"
    path.mkdir(parents=True, exist_ok=True)
    return path
