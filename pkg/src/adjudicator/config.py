"""Run configuration: file loading (TOML or JSON) plus flag overrides."""

from __future__ import annotations

import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backend import Backend, BackendConfig, HttpBackend
from .errors import ConfigError
from .oracle import RuleOracleBackend
from .prompts import MODES


@dataclass(frozen=True)
class RunConfig:
    corpus_path: str
    dataset_path: str = ""
    mode: str = "full"
    backend: dict = field(default_factory=lambda: {"kind": "rule-oracle"})
    retrieval_k: int = 8
    workers: int = 1
    seed: int = 42
    output_dir: str = "out"

    def validated(self, *, need_dataset: bool = False) -> "RunConfig":
        if not Path(self.corpus_path).exists():
            raise ConfigError(f"corpus path does not exist: {self.corpus_path}")
        if need_dataset and not Path(self.dataset_path).exists():
            raise ConfigError(f"dataset path does not exist: {self.dataset_path}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {list(MODES)}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.retrieval_k < 1:
            raise ConfigError("retrieval_k must be >= 1")
        if not isinstance(self.backend, dict) or "kind" not in self.backend:
            raise ConfigError("backend config must be a table with a 'kind' field")
        return self


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        if path.suffix == ".toml":
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    known = {f for f in RunConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(**data)


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def make_backend(spec: dict) -> Backend:
    """Build a backend from the config's backend table.

    Canned scripted backends are constructed in code, not from config
    files, so only 'rule-oracle' and 'http' are accepted here.
    """
    kind = spec.get("kind")
    if kind == "rule-oracle":
        return RuleOracleBackend(
            config=BackendConfig(
                kind="scripted",
                model_name="rule-oracle",
                requests_per_minute=int(spec.get("requests_per_minute", 0)),
            )
        )
    if kind == "http":
        return HttpBackend(
            BackendConfig(
                kind="http",
                model_name=spec.get("model_name", ""),
                endpoint_url=spec.get("endpoint_url", ""),
                auth_env_var=spec.get("auth_env_var", ""),
                timeout_ms=int(spec.get("timeout_ms", 60_000)),
                max_parse_retries=int(spec.get("max_parse_retries", 2)),
                requests_per_minute=int(spec.get("requests_per_minute", 0)),
            )
        )
    raise ConfigError(f"unknown backend kind {kind!r} (expected 'rule-oracle' or 'http')")
