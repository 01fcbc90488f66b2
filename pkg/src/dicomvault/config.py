"""Server configuration: YAML file with environment-variable overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

import yaml

ENV_PREFIX = "DICOMVAULT_"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: Path = field(default_factory=lambda: Path("./data"))
    rbac_mode: bool = True
    token_ttl_seconds: float = 1800.0
    admin_username: str = "admin"
    admin_password: str = "admin"
    admin_email: str = "admin@localhost"
    audit_strict: bool = False
    audit_queue_size: int = 10_000
    default_query_limit: int = 100
    max_query_limit: int = 5000


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(kind: type, value):
    if kind is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _BOOL_TRUE:
            return True
        if text in _BOOL_FALSE:
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if kind is Path:
        return Path(value)
    return kind(value)


def load_config(path: str | Path | None = None,
                env: Mapping[str, str] | None = None) -> ServerConfig:
    env = os.environ if env is None else env
    config = ServerConfig()
    file_values = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {path} must hold a mapping")
        file_values = loaded
    for spec in fields(ServerConfig):
        kind = {"host": str, "port": int, "data_dir": Path, "rbac_mode": bool,
                "token_ttl_seconds": float, "admin_username": str, "admin_password": str,
                "admin_email": str, "audit_strict": bool, "audit_queue_size": int,
                "default_query_limit": int, "max_query_limit": int}[spec.name]
        if spec.name in file_values:
            setattr(config, spec.name, _coerce(kind, file_values[spec.name]))
        env_key = ENV_PREFIX + spec.name.upper()
        if env_key in env:
            setattr(config, spec.name, _coerce(kind, env[env_key]))
    unknown = set(file_values) - {f.name for f in fields(ServerConfig)}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return config
