"""Strict experiment configuration."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import HeavyTrafficError
from .models import LevyModel, model_from_dict

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "load_model"]


class ConfigError(Exception):
    """Unreadable, malformed or schema-invalid configuration (CLI exit code 2)."""


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(ge=0)
    model: Optional[dict[str, Any]] = None
    rho_list: Optional[list[float]] = None
    a_list: Optional[list[float]] = None
    n_samples: int = Field(10_000, ge=1)
    c_horizon: float = Field(64.0, gt=0)
    tol: float = Field(1e-10, gt=0)
    eps: float = Field(1e-4, gt=0, lt=1)
    step: Optional[float] = Field(None, gt=0)
    n_reference: int = Field(100_000, ge=1)
    t_grid: Optional[list[float]] = None
    x_grid: Optional[list[float]] = None
    dominance_paths: int = Field(0, ge=0)
    family: Optional[str] = None
    sigma2: float = Field(1.0, gt=0)
    workers: int = Field(1, ge=1)
    out: Optional[str] = None

    @field_validator("rho_list")
    @classmethod
    def _rho_in_unit_interval(cls, v):
        if v is not None:
            for i, r in enumerate(v):
                if not 0 < r < 1:
                    raise ValueError(f"rho_list[{i}] = {r} must lie in (0, 1)")
        return v

    @field_validator("a_list", "t_grid", "x_grid")
    @classmethod
    def _positive(cls, v, info):
        if v is not None:
            for i, r in enumerate(v):
                if not r > 0:
                    raise ValueError(f"{info.field_name}[{i}] = {r} must be positive")
        return v

    @field_validator("family")
    @classmethod
    def _family(cls, v):
        if v is not None and v not in ("gaussian", "truncated"):
            raise ValueError("family must be 'gaussian' or 'truncated'")
        return v

    @model_validator(mode="after")
    def _model_parses(self):
        if self.model is not None:
            try:
                model_from_dict(self.model)
            except (KeyError, TypeError, ValueError, HeavyTrafficError) as exc:
                raise ValueError(f"model: {exc}") from exc
        return self

    def levy_model(self) -> LevyModel:
        if self.model is None:
            raise ConfigError("config field 'model' is required for this command")
        return model_from_dict(self.model)

    def normalized(self) -> dict:
        """Canonical JSON-ready form; loading it again gives an equal config."""
        return self.model_dump(mode="json")


def _format_validation(err: ValidationError, source: str) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        parts.append(f"{source}: field '{loc}': {e['msg']}")
    return "\n".join(parts)


def parse_config(data: dict, source: str = "<config>") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_validation(err, source)) from None


def _read_json(path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config; ``overrides`` (e.g. from command-line flags) win over file values."""
    data = _read_json(path)
    if overrides and isinstance(data, dict):
        data = {**data, **overrides}
    return parse_config(data, str(path))


def load_model(path) -> LevyModel:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: model must be a JSON object")
    try:
        return model_from_dict(data)
    except (KeyError, TypeError, ValueError, HeavyTrafficError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
