import hashlib
import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings

from .errors import ConfigError
from ..models.config import RunConfig


class Settings(BaseSettings):
    app_name: str = Field("exoforce", alias="APP_NAME")

    # Output root for artifact directories (CLI --out wins)
    output_root: str = Field("runs", alias="EXOFORCE_OUTPUT_ROOT")

    # Logging
    log_level: str = Field("INFO", alias="EXOFORCE_LOG_LEVEL")
    log_json: bool = Field(False, alias="EXOFORCE_LOG_JSON")

    # Default shape-level / experiment-level fan-out
    workers: int = Field(1, alias="EXOFORCE_WORKERS")

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}


settings = Settings()


def _parse_override(item: str) -> tuple[list[str], Any]:
    if "=" not in item:
        raise ConfigError(f"override '{item}' is not of the form section.key=value")
    key, raw = item.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError(f"override '{item}' has an empty key")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"override '{item}' has an unparseable value: {e}") from e
    return path, value


def apply_overrides(data: dict, overrides: list[str] | None) -> dict:
    """Apply dotted key=value overrides onto a raw config mapping (in place)."""
    for item in overrides or []:
        path, value = _parse_override(item)
        node = data
        for part in path[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"override '{item}': '{part}' is not a section")
            node = child
        node[path[-1]] = value
    return data


def load_run_config(path: str | Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    """
    Load a RunConfig from a YAML document, then apply CLI overrides.

    A missing path yields the defaults; every section is optional.
    """
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            loaded = yaml.safe_load(p.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed config {p}: {e}") from e
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"malformed config {p}: top level must be a mapping")
        data = loaded

    apply_overrides(data, overrides)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"malformed config: {e}") from e


def config_hash(config: RunConfig) -> str:
    """sha256 over the canonical JSON form of the resolved config"""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_resolved_config(config: RunConfig, directory: str | Path) -> Path:
    """Write config.resolved.yaml (with seed and hash) into an artifact directory."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    payload = config.model_dump(mode="json")
    payload["config_hash"] = config_hash(config)
    target = out / "config.resolved.yaml"
    target.write_text(yaml.safe_dump(payload, sort_keys=True), encoding="utf-8")
    return target
