"""Engine configuration: file values, then environment, then CLI flags.

The config file is JSON with one section per subsystem; unknown keys are
rejected so typos fail loudly. Environment variables override file values
and CLI flags override both.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .catalog import (
    DEFAULT_CATALOG_SEED,
    DEFAULT_CATALOG_SIZE,
    AssetRecord,
    build_catalog,
    load_catalog,
)
from .errors import UsageError
from .layout import LayoutOptions, TableSpec
from .relations import RelationThresholds
from .sim import SimOptions


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"  # mock | transcript | http
    transcript_dir: str | None = None
    base_url: str | None = None
    model: str | None = None
    base_url_env: str = "TABLETASK_BACKEND_URL"
    model_env: str = "TABLETASK_BACKEND_MODEL"
    api_key_env: str = "TABLETASK_API_KEY"
    retries: int = 3
    num_objects: int = 5
    pool_size: int = 50


@dataclass(frozen=True)
class EngineConfig:
    seed: int = 0
    catalog_path: str | None = None
    catalog_size: int = DEFAULT_CATALOG_SIZE
    catalog_seed: int = DEFAULT_CATALOG_SEED
    table: TableSpec = field(default_factory=TableSpec)
    thresholds: RelationThresholds = field(default_factory=RelationThresholds)
    layout: LayoutOptions = field(default_factory=LayoutOptions)
    sim: SimOptions = field(default_factory=SimOptions)
    backend: BackendConfig = field(default_factory=BackendConfig)

    def load_assets(self) -> list[AssetRecord]:
        if self.catalog_path:
            return load_catalog(self.catalog_path)
        return build_catalog(self.catalog_size, self.catalog_seed)

    def make_backend(self, catalog: list[AssetRecord]):
        from .taskgen import HttpBackend, MockBackend, TranscriptBackend

        if self.backend.kind == "mock":
            return MockBackend(catalog, num_objects=self.backend.num_objects)
        if self.backend.kind == "transcript":
            if not self.backend.transcript_dir:
                raise UsageError("transcript backend needs backend.transcript_dir")
            return TranscriptBackend(self.backend.transcript_dir)
        if self.backend.kind == "http":
            base_url = self.backend.base_url or os.environ.get(self.backend.base_url_env)
            model = self.backend.model or os.environ.get(self.backend.model_env)
            if not base_url or not model:
                raise UsageError(
                    "http backend needs a base URL and model "
                    f"(config or ${self.backend.base_url_env}/${self.backend.model_env})"
                )
            return HttpBackend(base_url, model, api_key=os.environ.get(self.backend.api_key_env))
        raise UsageError(f"unknown backend kind {self.backend.kind!r}")


_SECTION_FIELDS = {
    "table": {"extent_x", "extent_y", "surface_z", "margin"},
    "thresholds": {"xy_close", "touching", "between_angle_max"},
    "layout": {"max_attempts", "retry_rounds", "sibling_clearance", "use_workspace", "reach_radius"},
    "sim": {"budget", "reach_radius", "clearance", "home_height", "hand_radius"},
    "backend": {
        "kind", "transcript_dir", "base_url", "model",
        "base_url_env", "model_env", "api_key_env",
        "retries", "num_objects", "pool_size",
    },
}
_TOP_FIELDS = {"seed", "catalog_path", "catalog_size", "catalog_seed"} | set(_SECTION_FIELDS)


def _build_section(cls, data: dict, section: str):
    allowed = _SECTION_FIELDS[section]
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(f"unknown config keys in {section}: {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad {section} config: {exc}") from exc


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Read the config file (if any) and apply environment overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must be a JSON object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")

    config = EngineConfig(
        seed=int(data.get("seed", 0)),
        catalog_path=data.get("catalog_path"),
        catalog_size=int(data.get("catalog_size", DEFAULT_CATALOG_SIZE)),
        catalog_seed=int(data.get("catalog_seed", DEFAULT_CATALOG_SEED)),
        table=_build_section(TableSpec, data.get("table", {}), "table"),
        thresholds=_build_section(RelationThresholds, data.get("thresholds", {}), "thresholds"),
        layout=_build_section(LayoutOptions, data.get("layout", {}), "layout"),
        sim=_build_section(SimOptions, data.get("sim", {}), "sim"),
        backend=_build_section(BackendConfig, data.get("backend", {}), "backend"),
    )
    return _apply_env(config)


def _apply_env(config: EngineConfig) -> EngineConfig:
    env = os.environ
    if "TABLETASK_SEED" in env:
        config = replace(config, seed=int(env["TABLETASK_SEED"]))
    if "TABLETASK_CATALOG" in env:
        config = replace(config, catalog_path=env["TABLETASK_CATALOG"])
    th = config.thresholds
    if "TABLETASK_XY_CLOSE" in env:
        th = replace(th, xy_close=float(env["TABLETASK_XY_CLOSE"]))
    if "TABLETASK_TOUCHING" in env:
        th = replace(th, touching=float(env["TABLETASK_TOUCHING"]))
    if "TABLETASK_BETWEEN_ANGLE" in env:
        th = replace(th, between_angle_max=float(env["TABLETASK_BETWEEN_ANGLE"]))
    if th is not config.thresholds:
        config = replace(config, thresholds=th)
    if "TABLETASK_BACKEND" in env:
        config = replace(config, backend=replace(config.backend, kind=env["TABLETASK_BACKEND"]))
    return config


def apply_flag_overrides(
    config: EngineConfig,
    seed: int | None = None,
    near_threshold: float | None = None,
    touch_threshold: float | None = None,
    between_angle: float | None = None,
    backend: str | None = None,
) -> EngineConfig:
    """CLI flags win over file and environment."""
    if seed is not None:
        config = replace(config, seed=seed)
    th = config.thresholds
    if near_threshold is not None:
        th = replace(th, xy_close=near_threshold)
    if touch_threshold is not None:
        th = replace(th, touching=touch_threshold)
    if between_angle is not None:
        if not 0 < between_angle < math.pi / 2:
            raise UsageError("--between-angle must be in (0, pi/2)")
        th = replace(th, between_angle_max=between_angle)
    if th is not config.thresholds:
        config = replace(config, thresholds=th)
    if backend is not None:
        config = replace(config, backend=replace(config.backend, kind=backend))
    return config
