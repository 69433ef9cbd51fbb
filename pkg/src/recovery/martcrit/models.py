from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel

from recovery.boundary.models import IntegralVerdict


class MartingaleStatus(str, Enum):
    MARTINGALE = "martingale"
    STRICT_LOCAL = "strict_local"
    INDETERMINATE = "indeterminate"


class MartingaleVerdict(BaseModel):
    lam: float
    status: MartingaleStatus
    left_integral: IntegralVerdict
    right_integral: IntegralVerdict


class LambdaZero(BaseModel):
    """Lower end of the martingale set.

    ``lambda_zero`` is -inf when every sampled lambda down to ``floor`` is a
    martingale, and None when the set is empty.
    """

    lambda_zero: Optional[float]
    floor: float
    floor_hit: bool
    empty: bool = False
    bracket: Optional[Tuple[float, float]] = None
    iterations: int = 0
