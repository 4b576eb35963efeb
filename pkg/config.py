"""Run configuration: one JSON document validated before any computation."""
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional

import joblib
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import ConfigError
from problem import ProblemSpec
from radial_grid import RadialGrid, make_grid
from solver import SWEEP_AXES, SolverOptions
from verification import VerifySpec

logger = logging.getLogger(__name__)


class GridSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    r_max: float = Field(default=20.0, gt=0, description="Truncation radius")
    n: int = Field(default=2001, ge=16, description="Node count including r = 0")
    scheme: Literal["uniform", "graded"] = "uniform"

    def build(self) -> RadialGrid:
        return make_grid(self.r_max, self.n, self.scheme)


class FiberingSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_lo: float = Field(default=1e-2, gt=0)
    t_hi: float = Field(default=1e2, gt=0)
    count: int = Field(default=64, ge=2)
    lam: float = Field(default=1.0, ge=0.5, le=1.0)
    limit: bool = False
    function: Literal["gaussian", "ground_state"] = "gaussian"
    amplitude: float = Field(default=3.0, gt=0)
    width: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_range(self) -> "FiberingSpec":
        if self.t_lo >= self.t_hi:
            raise ValueError("The fibering scan needs t_lo < t_hi.")
        return self


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["lambda", "axis"] = "lambda"
    lambdas: List[float] = Field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    axis: Optional[str] = None
    values: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_axis(self) -> "SweepSpec":
        if self.kind == "axis":
            if self.axis not in SWEEP_AXES:
                raise ValueError(f"An axis sweep needs 'axis' set to one of {', '.join(SWEEP_AXES)}.")
            if not self.values:
                raise ValueError("An axis sweep needs at least one value.")
        else:
            if any(not 0.5 <= lam <= 1.0 for lam in self.lambdas):
                raise ValueError("Every lambda must lie in [1/2, 1].")
            if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
                raise ValueError("The lambda grid must be strictly increasing.")
        return self


class OracleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lam: float = Field(default=1.0, ge=0.5, le=1.0)
    tolerance: float = Field(default=1e-3, gt=0, description="Relative gap accepted between the methods")


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: ProblemSpec
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    verify: VerifySpec = Field(default_factory=VerifySpec)
    fibering: FiberingSpec = Field(default_factory=FiberingSpec)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    oracle: OracleSpec = Field(default_factory=OracleSpec)
    output_dir: str = "out"


def _describe(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "config"
        lines.append(f"{where}: {err['msg']}")
    return "; ".join(lines)


def load_config(path: str) -> RunConfig:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"The configuration file '{path}' does not exist.")
    try:
        return RunConfig.model_validate_json(config_path.read_text())
    except ValidationError as exc:
        raise ConfigError(f"The configuration is invalid. {_describe(exc)}") from exc


def config_hash(cfg: RunConfig) -> str:
    return joblib.hash(json.dumps(cfg.model_dump(mode="json"), sort_keys=True))
