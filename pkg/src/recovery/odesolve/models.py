from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

Side = Literal["left", "right"]


class EigenSolution(BaseModel):
    """Positive solution of L h = -lambda h sampled on the working grid.

    ``h`` and ``dh`` are mantissas: the true values are ``h * exp(rescale_log)``
    and ``dh * exp(rescale_log)``.  ``dh`` is the derivative in the state x.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lam: float
    slope: float
    u: np.ndarray
    x: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    rescale_log: np.ndarray
    truncation: Tuple[float, float]

    @field_validator("u")
    @classmethod
    def validate_u(cls, v):
        if v.ndim != 1 or v.size == 0:
            raise ValueError("solution needs at least one sample")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("solution samples must be sorted by state")
        return v

    @property
    def log_h(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.h)) + self.rescale_log

    @property
    def log_derivative(self) -> np.ndarray:
        """h'/h in the state variable."""
        return self.dh / self.h

    def values(self) -> np.ndarray:
        """True h, overflowing to inf where it is not representable."""
        with np.errstate(over="ignore"):
            return self.h * np.exp(self.rescale_log)

    @classmethod
    def from_log(cls, lam, slope, u, x, log_h, dlog_h, truncation=None):
        """Build a solution from log h and h'/h."""
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if truncation is None:
            truncation = (float(x[0]), float(x[-1]))
        return cls(
            lam=lam,
            slope=slope,
            u=u,
            x=x,
            h=np.ones_like(u),
            dh=np.asarray(dlog_h, dtype=float) * np.ones_like(u),
            rescale_log=np.asarray(log_h, dtype=float) * np.ones_like(u),
            truncation=truncation,
        )


class ZeroCrossing(BaseModel):
    """The shooting solution reached zero before the truncation boundary."""

    lam: float
    slope: float
    x0: float
    u0: float
    side: Side


class CandidateSlice(BaseModel):
    """Admissible slopes [m, M] at one lambda.

    Unbounded ends are stored as -inf / +inf.
    """

    lam: float
    m_lambda: float
    M_lambda: float
    nonempty: bool
    truncation_sensitivity: float
    indeterminate: bool = False

    @property
    def width(self) -> float:
        return self.M_lambda - self.m_lambda


class CriticalLambda(BaseModel):
    lambda_bar: float
    r_bar: float
    bracket: Tuple[float, float]
    iterations: int
    expansions: int
    slice_width: float
