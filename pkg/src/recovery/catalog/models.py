import math
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from recovery.model.models import MarketModel


class ExpectedSet(BaseModel):
    """Admissible set stated in closed form: (lo, hi] or (lo, hi), or empty."""

    empty: bool = False
    lo: float = -math.inf
    hi: Optional[float] = None
    hi_included: Optional[bool] = None
    reason: Optional[str] = None


class ClosedFormModel(BaseModel):
    """Reference model with closed-form lambda_bar, M_lambda and h_lambda.

    ``log_h(lam, x)`` and ``dlog_h(lam, x)`` give log h and h'/h in the
    state of ``model``; ``m_slope(lam)`` is h'(xi).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: str
    params: Dict[str, float]
    model: MarketModel
    log_model: MarketModel
    lambda_bar: float
    m_slope: Callable[[float], float]
    log_h: Callable[..., Any]
    dlog_h: Callable[..., Any]
    admissible_set_expected: ExpectedSet
    check_lambda: float
    check_residual: float
    price_slope: Optional[Callable[[float], float]] = None

    def h(self, lam: float, x):
        return np.exp(self.log_h(lam, x))
