"""Configuration: JSON config file with environment-variable overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from importlib.resources import files
from pathlib import Path
from typing import Optional


def data_path(name: str) -> Path:
    """Path to a packaged data file (seed store, test sets, fixtures)."""
    return Path(str(files("dynsched").joinpath("data", name)))


@dataclass(frozen=True)
class AppConfig:
    backend: str = "fixture"  # "fixture" | "http"
    fixture_path: Optional[str] = None
    fixture_fuzzy: bool = False
    http_endpoint: str = ""
    http_api_key: str = ""
    http_model: str = ""
    max_attempts: int = 3
    time_limit: float = 10.0
    sessions_dir: str = "./sessions"
    seed_store_path: Optional[str] = None

    def resolved_seed_store(self) -> Path:
        if self.seed_store_path:
            return Path(self.seed_store_path)
        return data_path("seed_store.json")


_ENV_KEYS = {
    "DYNSCHED_BACKEND": ("backend", str),
    "DYNSCHED_FIXTURE": ("fixture_path", str),
    "DYNSCHED_FIXTURE_FUZZY": ("fixture_fuzzy", lambda v: v.lower() in ("1", "true", "yes")),
    "DYNSCHED_HTTP_ENDPOINT": ("http_endpoint", str),
    "DYNSCHED_HTTP_API_KEY": ("http_api_key", str),
    "DYNSCHED_HTTP_MODEL": ("http_model", str),
    "DYNSCHED_MAX_ATTEMPTS": ("max_attempts", int),
    "DYNSCHED_TIME_LIMIT": ("time_limit", float),
    "DYNSCHED_SESSIONS_DIR": ("sessions_dir", str),
    "DYNSCHED_SEED_STORE": ("seed_store_path", str),
}


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> AppConfig:
    """Config file first, then environment overrides on top."""
    cfg = AppConfig()
    if path:
        raw = json.loads(Path(path).read_text())
        unknown = set(raw) - set(AppConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **raw)
    env = os.environ if env is None else env
    overrides = {}
    for key, (field_name, conv) in _ENV_KEYS.items():
        if key in env:
            overrides[field_name] = conv(env[key])
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def make_backend(cfg: AppConfig):
    from .agents import FixtureBackend, HttpBackend

    if cfg.backend == "fixture":
        if not cfg.fixture_path:
            raise ValueError("fixture backend selected but no fixture_path configured")
        return FixtureBackend.from_file(cfg.fixture_path, fuzzy=cfg.fixture_fuzzy)
    if cfg.backend == "http":
        if not cfg.http_endpoint:
            raise ValueError("http backend selected but no endpoint configured")
        return HttpBackend(cfg.http_endpoint, cfg.http_api_key, cfg.http_model)
    raise ValueError(f"unknown backend {cfg.backend!r}")
