"""YAML run configuration, validated with pydantic.

Unknown keys are rejected everywhere. Relative field-CSV paths are resolved
against the directory of the configuration file.
"""

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
import yaml


class ConfigError(Exception):
    """Unreadable or schema-violating configuration (CLI exit code 2)."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScenarioSection(_Strict):
    n_s: float = Field(gt=0)
    n_b: float = Field(ge=0)
    m_copies: int = Field(default=1, ge=1)
    n_modes: Optional[int] = Field(default=None, ge=1)


class BasisSection(_Strict):
    kind: Literal["hermite_gauss", "pixel"] = "hermite_gauss"
    max_order: int = Field(default=3, ge=0)
    waist: float = Field(default=1.0, gt=0)
    polarization: Literal["scalar", "interleaved"] = "scalar"
    pixels: tuple[int, int] = (2, 2)
    n_modes: Optional[int] = Field(default=None, ge=1)
    gram_tol: float = Field(default=1e-6, gt=0)
    span_tol: float = Field(default=1e-3, gt=0)


Coefficient = Union[float, tuple[float, float]]


class TargetEntry(_Strict):
    name: str
    kappa: float = Field(ge=0, le=1)
    coefficients: Optional[list[Coefficient]] = None
    field: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.coefficients is None) == (self.field is None):
            raise ValueError(f"target {self.name!r}: give exactly one of 'coefficients' or 'field'")
        return self

    def coefficient_array(self):
        vals = [complex(c[0], c[1]) if isinstance(c, tuple) else complex(c) for c in self.coefficients]
        return np.array(vals, dtype=complex)


class EngineSection(_Strict):
    method: Literal["exact", "perturbative", "asymptotic", "all"] = "exact"
    flavors: list[Literal["CI", "QI"]] = ["CI", "QI"]
    s_tol: float = Field(default=1e-6, gt=0, lt=0.1)
    cutoffs: Optional[Union[int, list[int]]] = None
    idler_cutoff: Optional[int] = Field(default=None, ge=1)
    dps: Optional[int] = Field(default=None, ge=16, le=200)

    @field_validator("flavors")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one flavor is required")
        return v

    @property
    def methods(self):
        if self.method == "all":
            return ("exact", "perturbative", "asymptotic")
        return (self.method,)


class SweepSection(_Strict):
    depth: int = Field(default=5, ge=2, le=12)
    c_s: float = Field(default=0.1, gt=0)
    c_kappa: float = Field(default=1.0, gt=0)
    kappa_weights: tuple[float, float] = (1.0, 1.0)
    targets: Optional[tuple[str, str]] = None
    dps: int = Field(default=60, ge=30, le=200)


class ValidateSection(_Strict):
    n_s: float = Field(default=1e-2, gt=0)
    n_b: float = Field(default=10.0, gt=0)
    coefficients: list[Coefficient] = [1.0]
    kappa: float = Field(default=1e-6, ge=0, le=1)
    halvings: int = Field(default=2, ge=2)
    det_kappas: list[float] = [1e-5, 5e-6, 2.5e-6]
    samples: int = Field(default=1000, ge=10)
    safety_factor: float = Field(default=100.0, gt=0)
    cross_validation: bool = True

    def coefficient_array(self):
        vals = [complex(c[0], c[1]) if isinstance(c, tuple) else complex(c) for c in self.coefficients]
        return np.array(vals, dtype=complex)


class ScenarioConfig(_Strict):
    scenario: Optional[ScenarioSection] = None
    basis: Optional[BasisSection] = None
    targets: list[TargetEntry] = []
    engine: EngineSection = EngineSection()
    sweep: SweepSection = SweepSection()
    validate_: ValidateSection = Field(default=ValidateSection(), alias="validate")
    seed: int = 0

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _unique_names(self):
        names = [t.name for t in self.targets]
        if len(set(names)) != len(names):
            raise ValueError("target names must be unique")
        return self


def load_config(path):
    """Parse and validate a YAML configuration file.

    Returns ``(config, base_dir, digest)`` where ``digest`` is the SHA-256 of
    the raw file bytes.
    """
    if path is None:
        cfg = ScenarioConfig()
        digest = hashlib.sha256(json.dumps(cfg.model_dump(mode="json"), sort_keys=True).encode()).hexdigest()
        return cfg, Path.cwd(), digest
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(raw.decode("utf-8")) or {}
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    try:
        cfg = ScenarioConfig.model_validate(data)
    except ValueError as exc:
        raise ConfigError(f"config {path} failed validation:\n{exc}") from exc
    return cfg, path.parent.resolve(), hashlib.sha256(raw).hexdigest()
