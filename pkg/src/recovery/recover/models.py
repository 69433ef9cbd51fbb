import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from recovery.martcrit.models import MartingaleStatus
from recovery.usualset.models import InclusionFlag, UsualStatus


class AdmissibleSample(BaseModel):
    lam: float
    m_slope: float
    martingale: MartingaleStatus
    usual: UsualStatus


class AdmissibleSet(BaseModel):
    """Intersection of the martingale and usual sets.

    ``lambda_lo`` is -inf when the martingale set is unbounded below; the
    samples then start at ``sampled_lo`` and the part below it is unsampled.
    """

    lambda_lo: Optional[float] = None
    lo_included: Optional[InclusionFlag] = None
    lambda_hi: Optional[float] = None
    hi_included: Optional[InclusionFlag] = None
    lambda_bar: float
    samples: List[AdmissibleSample] = []
    sampled_lo: Optional[float] = None
    empty: bool
    reason: Optional[str] = None

    def contains(self, lam: float) -> bool:
        if self.empty or self.lambda_lo is None or self.lambda_hi is None:
            return False
        if lam > self.lambda_hi or lam < self.lambda_lo:
            return False
        if lam == self.lambda_hi and self.hi_included != InclusionFlag.INCLUDED:
            return False
        if lam == self.lambda_lo and math.isfinite(lam):
            return self.lo_included == InclusionFlag.INCLUDED
        return True


class RecoveredAgent(BaseModel):
    """Representative agent for one admissible (lambda, M_lambda).

    All grids are sampled on the solver's working grid; the agent is not
    extrapolated beyond it.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    beta: float
    slope: float
    x: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    log_phi: np.ndarray
    marginal_utility: np.ndarray
    utility: np.ndarray
    drift: np.ndarray
    clipped: bool = False

    def objective_drift(self, x):
        """k + sigma^2 phi'/phi, interpolated from the grid."""
        return np.interp(x, self.x, self.drift)
