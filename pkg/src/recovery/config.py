import os

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from recovery.utils import parse_int_or_fallback


class Settings:
    """Process-level settings read from the environment.

    These only steer logging and the thread pool; numeric results never
    depend on them.
    """

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Thread pool used for lambda sweeps and simulation blocks
    MAX_WORKERS: int = max(1, parse_int_or_fallback(os.getenv("MAX_WORKERS"), 1))


settings = Settings()


class DepthSchedule(BaseModel):
    """Geometric truncation depths used by the improper-integral verdicts."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    delta: float = 2.0
    n_max: int = 10

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v):
        if not v > 0:
            raise ValueError("depth_schedule.delta must be strictly positive")
        return v

    @field_validator("n_max")
    @classmethod
    def validate_n_max(cls, v):
        if v < 6:
            raise ValueError("depth_schedule.n_max must be at least 6")
        return v


class Numerics(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    truncation_log_halfwidth: float = 20.0
    grid_step: float = 0.01
    ode_rel_tol: float = 1e-10
    bisect_tol_lambda: float = 1e-6
    bisect_tol_slope: float = 1e-10
    lambda_zero_tol: float = 1e-4
    lambda_one_tol: float = 1e-4
    bracket_growth: float = 0.01
    max_bracket_expansions: int = 30
    grid_span: float = 0.1
    depth_schedule: DepthSchedule = DepthSchedule()

    @field_validator(
        "truncation_log_halfwidth",
        "grid_step",
        "ode_rel_tol",
        "bisect_tol_lambda",
        "bisect_tol_slope",
        "lambda_zero_tol",
        "lambda_one_tol",
        "bracket_growth",
        "grid_span",
    )
    @classmethod
    def validate_positive(cls, v, info):
        if not v > 0:
            raise ValueError(f"{info.field_name} must be strictly positive")
        return v

    @field_validator("max_bracket_expansions")
    @classmethod
    def validate_expansions(cls, v):
        if v < 1:
            raise ValueError("max_bracket_expansions must be at least 1")
        return v

    @model_validator(mode="after")
    def validate_depths_fit(self):
        depth = self.depth_schedule.delta * self.depth_schedule.n_max
        if depth > self.truncation_log_halfwidth + 1e-12:
            raise ValueError(
                "depth_schedule reaches beyond truncation_log_halfwidth "
                f"({depth} > {self.truncation_log_halfwidth})"
            )
        if self.grid_step * 50 > self.depth_schedule.delta:
            raise ValueError("grid_step is too coarse for the depth schedule")
        return self


DEFAULT_NUMERICS = Numerics()
