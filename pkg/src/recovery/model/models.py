import math
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from recovery.model.coordinates import Chart, WorkingGrid, chart_for

# Half-width (in chart units) of the sample grid used to validate coefficients.
CHECK_HALFWIDTH = 20.0
CHECK_POINTS = 161


class Domain(BaseModel):
    """Open state interval (lo, hi); only hi = +inf is supported."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: float = 0.0
    hi: float = math.inf

    @field_validator("lo")
    @classmethod
    def validate_lo(cls, v):
        if math.isnan(v) or v == math.inf:
            raise ValueError("domain.lo must be a real number or -inf")
        return v

    @field_validator("hi")
    @classmethod
    def validate_hi(cls, v):
        if v != math.inf:
            raise ValueError("only domains unbounded above are supported")
        return v

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi


class MarketModel(BaseModel):
    """Coefficients of dX = b dt + sigma dB and dG/G = (r + v^2) dt + v dB.

    Every coefficient is a vectorised callable of the state.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    b: Callable[..., Any]
    sigma: Callable[..., Any]
    r: Callable[..., Any]
    v: Callable[..., Any]
    xi: float
    domain: Domain = Domain()
    name: str = "custom"

    @model_validator(mode="after")
    def validate_coefficients(self):
        if not math.isfinite(self.xi) or not self.domain.contains(self.xi):
            raise ValueError(f"xi={self.xi} must lie strictly inside the domain")
        chart = self.chart
        u = chart.to_u(self.xi) + np.linspace(
            -CHECK_HALFWIDTH, CHECK_HALFWIDTH, CHECK_POINTS
        )
        x = np.asarray(chart.to_x(u), dtype=float)
        for field in ("b", "sigma", "r", "v"):
            values = np.broadcast_to(getattr(self, field)(x), x.shape)
            bad = ~np.isfinite(values)
            if bad.any():
                where = x[int(np.argmax(bad))]
                raise ValueError(f"{field} is not finite at x={where}")
            if field == "sigma" and not np.all(values > 0):
                where = x[int(np.argmax(values <= 0))]
                raise ValueError(f"sigma must be strictly positive, got 0 or less at x={where}")
        return self

    @property
    def chart(self) -> Chart:
        return chart_for(self.domain.lo)

    def k(self, x):
        """Drift of the reference dynamics, b - sigma v."""
        return self.b(x) - self.sigma(x) * self.v(x)


class DerivedCoefficients(BaseModel):
    """k and log gamma tabulated on the working grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: MarketModel
    grid: WorkingGrid
    k_nodes: np.ndarray
    sigma2_nodes: np.ndarray
    r_nodes: np.ndarray
    gamma_log_nodes: np.ndarray

    def k(self, x):
        return self.model.k(x)

    def gamma_log(self, x):
        from recovery.model.coefficients import gamma_log_at

        return gamma_log_at(self, x)

    @property
    def r_bar(self) -> float:
        return float(np.min(self.r_nodes))

    @property
    def r_is_constant(self) -> bool:
        r_xi = float(self.r_nodes[self.grid.center])
        return float(np.ptp(self.r_nodes)) <= 1e-12 * (1.0 + abs(r_xi))
