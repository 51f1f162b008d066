import math
import os
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import ConstraintViolation, ConstraintViolationError, violation
from core.geometry.space import SUPPORTED_SPHERICAL_DIMENSIONS
from core.solver.data import SUPPORT_WIDTHS

OUT_ENV = "HYPERWAVE_OUT"
DEFAULT_OUT = "runs/latest"


class Subcommand(str, Enum):
    PARAMS = "params"
    SELFTEST = "selftest"
    DISPERSIVE = "dispersive"
    SOLVE = "solve"
    SCATTER = "scatter"
    STABILITY = "stability"


class SolveMode(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


class ExperimentConfig(BaseModel):
    """Every knob of one run. None means 'derive from the other fields'."""
    model_config = ConfigDict(extra="forbid", use_enum_values=True, validate_assignment=True)

    # geometry and equation
    n: int = Field(3, ge=2, description="Dimension of the hyperbolic space")
    c: Optional[float] = Field(None, description="Mass; None selects the shifted case c = -rho^2")
    b: float = Field(2.7, gt=1.0)
    sigma: float = Field(0.05, gt=0.0)
    h: float = Field(0.0, ge=0.0)
    d: float = Field(math.inf, ge=1.0)
    t0: float = Field(1.0, ge=1.0)
    delta: Optional[float] = Field(None, gt=0.0)
    mu: float = 1.0
    sign: Literal[1, -1] = 1

    # grids
    r_max: float = Field(14.0, gt=0.0)
    n_r: int = Field(1024, ge=16, le=4096)
    lambda_max: Union[float, Literal["auto"]] = 24.0
    n_lambda: Optional[int] = Field(None, ge=16, le=4096)
    order: int = Field(8, ge=2, le=16)
    t_max: float = Field(10.0, gt=0.0)
    core_points: int = Field(40, ge=4)
    tail_step: float = Field(0.05, gt=0.0)
    t_min: float = Field(1e-3, gt=0.0)

    # iteration
    tol: float = Field(1e-8, gt=0.0)
    max_iter: int = Field(50, ge=1)
    mode: SolveMode = Field(SolveMode.GLOBAL, validate_default=True)
    local_T: float = Field(1.0, gt=0.0)
    epsilon: Optional[float] = Field(None, gt=0.0)
    bump_width: float = Field(0.5, gt=0.0)
    difference_amplitude: float = Field(0.1, gt=0.0)

    # sweeps
    h_values: Optional[List[float]] = None
    d_values: Optional[List[float]] = None
    r_values: Optional[List[float]] = None
    dispersive_t_min: float = Field(0.05, gt=0.0)
    dispersive_t_max: float = Field(10.0, gt=0.0)
    dispersive_samples: int = Field(200, ge=5)
    spectral_floor: float = Field(0.0, ge=0.0)
    horizon_tol: float = Field(1e-6, gt=0.0)
    dump_kernel: bool = False

    # run
    out: str = Field(default_factory=lambda: os.environ.get(OUT_ENV, DEFAULT_OUT))
    seed: int = 0
    threads: int = Field(1, ge=1)
    log_level: str = "INFO"
    progress: bool = False

    def sweep_d(self) -> List[float]:
        return list(self.d_values) if self.d_values is not None else [2.0, self.b + 1.0, math.inf]

    def sweep_r(self) -> List[float]:
        return list(self.r_values) if self.r_values is not None else [self.b + 1.0, math.inf]

    def precondition_violations(self, subcommand: str) -> List[ConstraintViolation]:
        """Cross-field checks of the numerical subcommands, collected rather than raised one by one."""
        problems: List[ConstraintViolation] = []
        if subcommand == Subcommand.PARAMS.value:
            return problems
        if self.n not in SUPPORTED_SPHERICAL_DIMENSIONS:
            problems.append(violation("n", f"n in {SUPPORTED_SPHERICAL_DIMENSIONS}", self.n, "UNSUPPORTED_DIMENSION"))
        rho = (self.n - 1) / 2.0
        if self.c is not None and self.c < -rho * rho:
            problems.append(violation("c", f"c >= -rho^2 = {-rho * rho:g}", self.c, "SPECTRAL_POSITIVITY"))
        if SUPPORT_WIDTHS * self.bump_width > self.r_max:
            problems.append(violation("bump_width", f"{SUPPORT_WIDTHS:g}*bump_width <= r_max", self.bump_width))
        if subcommand in (Subcommand.SOLVE.value, Subcommand.SCATTER.value, Subcommand.STABILITY.value):
            if self.t_min >= self.t0:
                problems.append(violation("t_min", "t_min < t0", self.t_min))
            if subcommand != Subcommand.SOLVE.value and self.t_max < self.t0 + 4.0:
                problems.append(violation("t_max", "t_max >= t0 + 4 (fit window)", self.t_max))
        if subcommand == Subcommand.DISPERSIVE.value and self.dispersive_t_max <= self.dispersive_t_min:
            problems.append(violation("dispersive_t_max", "dispersive_t_max > dispersive_t_min", self.dispersive_t_max))
        return problems

    def check(self, subcommand: str):
        problems = self.precondition_violations(subcommand)
        if problems:
            raise ConstraintViolationError("configuration rejected", problems)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="python"), sort_keys=True)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        return build_config(yaml.safe_load(text) or {})


def violations_from_validation(exc: ValidationError) -> List[ConstraintViolation]:
    return [
        violation(".".join(str(part) for part in err["loc"]) or "config", err["msg"], err.get("input"), "CONFIG")
        for err in exc.errors()
    ]


def build_config(values: Dict[str, Any]) -> ExperimentConfig:
    """ExperimentConfig from plain values; pydantic errors become constraint violations."""
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        raise ConstraintViolationError("configuration rejected", violations_from_validation(exc)) from exc


def parse_override(item: str) -> Dict[str, Any]:
    """'key=value' with the value read as YAML, so numbers, lists and .inf work."""
    if "=" not in item:
        raise ConstraintViolationError(
            "override must look like key=value", [violation("--set", "key=value", item, "CONFIG")]
        )
    key, raw = item.split("=", 1)
    return {key.strip(): yaml.safe_load(raw)}
