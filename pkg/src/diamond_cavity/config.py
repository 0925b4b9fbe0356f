"""Run-configuration schema (JSON documents, units spelled out in key names)."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .model import FrameChoice, PhysicalParams

SCHEMA_VERSION = 1
TWO_PI = 2.0 * math.pi


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelBlock(_Strict):
    """Model parameters in units of ``g``; ``g_over_2pi_mhz`` fixes the physical scale."""

    g_over_2pi_mhz: float = Field(gt=0)
    g_prime_over_g: float = Field(ge=0)
    delta_over_g: float
    omega_over_g: float = Field(ge=0)
    # null: tune Omega' so that delta1 = 0
    omega_prime_over_g: Optional[float] = Field(default=None, ge=0)
    gamma_over_g: float = Field(default=0.0, ge=0)
    gamma_prime_over_g: float = Field(default=0.0, ge=0)
    gamma_pp_over_g: float = Field(default=0.0, ge=0)
    n_atoms: int = Field(default=1, ge=1)
    cutoff: int = Field(default=2, ge=0)

    def to_params(self) -> PhysicalParams:
        from .model import omega_prime_for_zero_delta1

        g = TWO_PI * self.g_over_2pi_mhz * 1e6
        wp = self.omega_prime_over_g
        if wp is None:
            wp = omega_prime_for_zero_delta1(self.omega_over_g, self.delta_over_g, 1.0, self.g_prime_over_g)
        return PhysicalParams.from_units_of_g(
            g, self.g_prime_over_g, self.delta_over_g, self.omega_over_g, wp,
            self.gamma_over_g, self.gamma_prime_over_g, self.gamma_pp_over_g,
            n_atoms=self.n_atoms, cutoff=self.cutoff,
        )


class CavityBlock(_Strict):
    length_mm: float = Field(gt=0)
    radius_mm: float = Field(default=50.0, gt=0)
    t1_ppm: float = Field(default=1.8, ge=0)
    t2_ppm: float = Field(default=1.8, ge=0)
    t1_prime_ppm: float = Field(default=1.8, ge=0)
    t2_prime_ppm: float = Field(ge=0)
    loss_ppm: float = Field(default=3.15, ge=0)
    atom_preset: str = "rb87"
    n_atoms: int = Field(ge=1)
    delta_over_g: float
    omega_over_delta: float = Field(ge=0)
    include_kappa_gamma: bool = False

    @model_validator(mode="after")
    def _stable(self):
        if not self.length_mm < 2 * self.radius_mm:
            raise ValueError("length_mm must be below 2 * radius_mm")
        return self


class ComplexList(_Strict):
    re: list[float]
    im: list[float]

    @model_validator(mode="after")
    def _same_length(self):
        if len(self.re) != len(self.im):
            raise ValueError("re and im must have the same length")
        return self


class MappingBlock(_Strict):
    amplitudes: list[float] | ComplexList
    frame: Literal["lab", "rotating", "generic"] = "lab"
    delta_x_over_g: Optional[float] = None
    window_over_tpi: tuple[float, float] = (0.8, 1.2)
    curve_points: int = Field(default=401, ge=2)
    curve_span_over_tpi: float = Field(default=2.0, gt=0)

    def amplitude_vector(self):
        import numpy as np

        if isinstance(self.amplitudes, ComplexList):
            return np.asarray(self.amplitudes.re) + 1j * np.asarray(self.amplitudes.im)
        return np.asarray(self.amplitudes, dtype=complex)

    def frame_choice(self, g: float) -> FrameChoice:
        if self.frame == "generic":
            if self.delta_x_over_g is None:
                raise ConfigError("frame 'generic' needs delta_x_over_g")
            return FrameChoice("generic", self.delta_x_over_g * g)
        if self.delta_x_over_g is not None:
            raise ConfigError("delta_x_over_g is only used with frame 'generic'")
        return FrameChoice(self.frame)


class TpiSet(_Strict):
    label: str
    model: ModelBlock


class TpiScanBlock(_Strict):
    sets: list[TpiSet] = Field(min_length=1)
    n_ph_max: int = Field(default=9, ge=1)
    window_over_tpi: tuple[float, float] = (0.8, 1.2)
    jump_threshold_percent: float = Field(default=1.0, gt=0)


class Axis(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1)
    log: bool = False

    def values(self):
        import numpy as np

        if self.log:
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


class FomBlock(_Strict):
    mode: Literal["point", "sweep"] = "point"
    length_mm: Optional[Axis] = None
    t2_prime_ppm: Optional[Axis] = None

    @model_validator(mode="after")
    def _axes(self):
        if self.mode == "sweep" and (self.length_mm is None or self.t2_prime_ppm is None):
            raise ValueError("sweep mode needs length_mm and t2_prime_ppm axes")
        return self


class ValidityBlock(_Strict):
    pass_threshold: float = Field(default=10.0, gt=0)
    warn_threshold: float = Field(default=3.0, gt=0)
    mean_photons_a: float = Field(default=1.0, ge=0)
    mean_photons_b: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def _order(self):
        if self.warn_threshold > self.pass_threshold:
            raise ValueError("warn_threshold must not exceed pass_threshold")
        return self


class RunConfig(_Strict):
    schema_version: Literal[1]
    experiment: str
    model: Optional[ModelBlock] = None
    cavity: Optional[CavityBlock] = None
    mapping: Optional[MappingBlock] = None
    tpi_scan: Optional[TpiScanBlock] = None
    fom: Optional[FomBlock] = None
    validity: ValidityBlock = ValidityBlock()
    output_dir: Optional[str] = None

    @field_validator("experiment")
    @classmethod
    def _name(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("experiment name must not be empty")
        return v

    @model_validator(mode="after")
    def _one_parameter_source(self):
        if self.model is not None and self.cavity is not None:
            raise ValueError("give either a model block or a cavity block, not both")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r} (expected {SCHEMA_VERSION})")
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
