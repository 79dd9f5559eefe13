"""
Model configuration schemas.

A model configuration is one JSON document. `model_kind` selects the
parameter block; every kind shares the sim and output blocks:

    {
      "model_kind": "simplex_factors",
      "params": {"kappa": [0.01], "theta": [0.03], "q": [0.2], "gamma0": 0.005},
      "z0": [0.3],
      "sim": {"dt": 0.001, "horizon": 5.0, "n_paths": 200000, "seed": 7},
      "output": {"directory": "out"},
      "validation": {"maturity": 5.0}
    }

Pydantic validates everything up front; a bad document becomes a
ConfigError before any simulation starts.
"""

import math
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from src.core.constants import CurveShape, DriftScheme
from src.core.exceptions import ConfigError
from src.factors.simplex import SimplexFactorParams
from src.hjm.curve import CurveGrid, VolSpec
from src.hjm.toy_model import ToyParams
from src.models.affine import AffineParams
from src.utils.helpers import steps_for_horizon


# ─── Shared blocks ─────────────────────────────────────

class SimConfig(BaseModel):
    """Time stepping and sampling."""
    model_config = ConfigDict(extra="forbid")

    dt: float | None = Field(default=None, gt=0)
    n_steps: int | None = Field(default=None, ge=0)
    horizon: float | None = Field(default=None, ge=0)
    n_paths: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    def steps(self, dt: float, fallback_horizon: float | None = None) -> int:
        """n_steps, else the steps reaching horizon (or fallback_horizon)."""
        if self.n_steps is not None:
            return self.n_steps
        horizon = self.horizon if self.horizon is not None else fallback_horizon
        if horizon is None:
            raise ConfigError("sim needs n_steps or horizon")
        return steps_for_horizon(horizon, dt)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "output"
    formats: list[Literal["csv", "json"]] = ["csv", "json"]
    path_limit: int = Field(default=100, ge=0)
    tau_grid: list[float] = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0]


class DriftCheckConfig(BaseModel):
    """Grid ensemble used for the drift-condition part of the battery."""
    model_config = ConfigDict(extra="forbid")

    enabled: bool = True
    vol_level: float = Field(default=1e-4, ge=0)
    n_paths: int = Field(default=10_000, ge=1)
    dt: float = Field(default=0.01, gt=0)
    n_steps: int = Field(default=10, ge=1)
    horizon: float = Field(default=0.5, gt=0)
    scheme: DriftScheme = DriftScheme.EULER
    n_points: int = Field(default=20, ge=1)


class ValidationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    maturity: float = Field(default=5.0, ge=0)
    positivity_horizon: float = Field(default=30.0, gt=0)
    drift_check: DriftCheckConfig = DriftCheckConfig()


# ─── Initial curves ────────────────────────────────────

class InitialCurveConfig(BaseModel):
    """
    Initial discount-derivative curve psi_0, either sampled or by shape:

        constant     psi_0(x) = level
        exponential  psi_0(x) = level * exp(-rate * x)

    Shapes are sampled on [0, horizon] every `spacing` years.
    """
    model_config = ConfigDict(extra="forbid")

    maturities: list[float] | None = None
    h_values: list[float] | None = None
    shape: CurveShape | None = None
    level: float = 0.0
    rate: float = Field(default=0.0, ge=0)
    horizon: float | None = Field(default=None, gt=0)
    spacing: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check(self):
        sampled = self.maturities is not None or self.h_values is not None
        if sampled == (self.shape is not None):
            raise ValueError("give either maturities/h_values samples or a shape")
        if sampled and (self.maturities is None or self.h_values is None):
            raise ValueError("sampled curves need both maturities and h_values")
        if self.shape is not None:
            if self.horizon is None or self.spacing is None:
                raise ValueError("shaped curves need horizon and spacing")
            if self.shape == CurveShape.EXPONENTIAL and self.rate <= 0:
                raise ValueError("exponential curves need rate > 0")
        return self

    def function(self) -> tuple[Callable[[float], float], Callable[[float], float]] | None:
        """(psi_0, primitive) for shaped curves, None for samples."""
        level, rate = self.level, self.rate
        if self.shape == CurveShape.CONSTANT:
            return (lambda s: level), (lambda s: level * s)
        if self.shape == CurveShape.EXPONENTIAL:
            return (lambda s: level * math.exp(-rate * s)), (lambda s: -level * math.expm1(-rate * s) / rate)
        return None

    def build(self) -> CurveGrid:
        if self.shape is None:
            return CurveGrid(t=0.0, maturities=np.array(self.maturities), h_values=np.array(self.h_values))
        n = int(round(self.horizon / self.spacing))
        maturities = np.linspace(0.0, n * self.spacing, n + 1)
        psi, _ = self.function()
        return CurveGrid(t=0.0, maturities=maturities, h_values=np.array([psi(x) for x in maturities]))


# ─── Model kinds ───────────────────────────────────────

class _ModelBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sim: SimConfig = SimConfig()
    output: OutputConfig = OutputConfig()


class AffineModelConfig(_ModelBase):
    model_kind: Literal["affine"]
    params: AffineParams
    z0: list[float]


class SimplexModelConfig(_ModelBase):
    model_kind: Literal["simplex_factors"]
    params: SimplexFactorParams
    z0: list[float]
    validation: ValidationConfig = ValidationConfig()


class ToyModelConfig(_ModelBase):
    model_kind: Literal["toy"]
    params: ToyParams
    r0: float


class GridModelConfig(_ModelBase):
    model_kind: Literal["grid"]
    initial: InitialCurveConfig
    vol: VolSpec = VolSpec()
    mpr: list[float] | None = None
    scheme: DriftScheme = DriftScheme.FLOW
    h_max: float | None = Field(default=None, gt=0)


ModelConfig = Annotated[
    AffineModelConfig | SimplexModelConfig | ToyModelConfig | GridModelConfig,
    Field(discriminator="model_kind"),
]

_adapter = TypeAdapter(ModelConfig)


def parse_model_config(text: str):
    """Validate a JSON document into the matching model config."""
    try:
        return _adapter.validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"invalid model configuration: {e}") from e


def load_model_config(path: str | Path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_model_config(text)


def apply_overrides(config, seed: int | None = None, paths: int | None = None, dt: float | None = None):
    """Return a copy with --seed/--paths/--dt applied to the sim block."""
    update = {}
    if seed is not None:
        update["seed"] = seed
    if paths is not None:
        update["n_paths"] = paths
    if dt is not None:
        update["dt"] = dt
    if not update:
        return config
    try:
        sim = SimConfig.model_validate({**config.sim.model_dump(), **update})
    except ValidationError as e:
        raise ConfigError(f"invalid command-line override: {e}") from e
    return config.model_copy(update={"sim": sim})
