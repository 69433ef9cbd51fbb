from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, field_validator


class Measure(str, Enum):
    Q = "q"
    P = "p"


class SimulationSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_paths: int = 10_000
    n_steps: int = 1_000
    horizon: float = 1.0
    seed: int = 0
    thresholds: List[float] = []
    antithetic: bool = False

    @field_validator("n_paths")
    @classmethod
    def validate_n_paths(cls, v):
        if v < 1:
            raise ValueError("n_paths must be at least 1")
        return v

    @field_validator("n_steps")
    @classmethod
    def validate_n_steps(cls, v):
        if v < 100:
            raise ValueError("n_steps must be at least 100")
        return v

    @field_validator("horizon")
    @classmethod
    def validate_horizon(cls, v):
        if not v >= 0 or v == float("inf"):
            raise ValueError("horizon must be finite and nonnegative")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if v < 0:
            raise ValueError("seed must be nonnegative")
        return v


class Estimate(BaseModel):
    mean: float
    stderr: float


class TerminalSummary(BaseModel):
    mean: float
    quantiles: Dict[str, float]


class Exceedance(BaseModel):
    threshold: float
    fraction: float


class SimulationResult(BaseModel):
    measure: Measure
    n_paths: int
    n_steps: int
    horizon: float
    seed: int
    antithetic: bool
    terminal_states: TerminalSummary
    martingale_estimate: Optional[Estimate] = None
    exceedance: List[Exceedance] = []
    clipped_paths: int = 0


class MartingaleMCCheck(BaseModel):
    lam: float
    estimate: float
    stderr: float
    passed: bool


class MeasureComparison(BaseModel):
    """Mean of f(X_T) under P against its reweighted Q-mean."""

    p_mean: Estimate
    q_mean: Estimate
