from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel


class UsualStatus(str, Enum):
    USUAL = "usual"
    NOT_USUAL = "not_usual"
    INDETERMINATE = "indeterminate"


class ConditionStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


class Rationale(str, Enum):
    THEOREM = "theorem"
    NUMERIC = "numeric"


class DecisionPath(str, Enum):
    ENTRANCE_LEFT = "entrance-left"
    NATURAL_LEFT_BELOW_R = "natural-left-below-r"
    CONSTANT_R_CRITICAL_AT_R = "constant-r-critical-at-r"
    CONSTANT_R_CRITICAL_ABOVE_R = "constant-r-critical-above-r"
    CONSTANT_R_NATURAL_RIGHT = "constant-r-natural-right"
    CONSTANT_R_GAMMA_CONVERGENT = "constant-r-gamma-convergent"
    ABOVE_CRITICAL = "above-critical"
    NUMERIC = "numeric"


CONDITIONS = ("positivity", "strict_increase", "left_limit_zero", "right_limit_infinity")


class UsualVerdict(BaseModel):
    """Usual-condition decision for (lambda, M_lambda).

    ``conditions`` are the decisive sub-verdicts; ``numeric`` always holds the
    sampled evidence, whichever path decided.
    """

    lam: float
    status: UsualStatus
    conditions: Dict[str, ConditionStatus]
    numeric: Dict[str, ConditionStatus]
    rationale: Rationale
    path: DecisionPath


class InclusionFlag(str, Enum):
    INCLUDED = "included"
    EXCLUDED = "excluded"
    INDETERMINATE = "indeterminate"


class LambdaOne(BaseModel):
    """Upper end of the usual set; ``lambda_one`` is None when the set is empty."""

    lambda_one: Optional[float]
    hi_included: Optional[InclusionFlag]
    empty: bool = False
    reason: Optional[str] = None
    path: DecisionPath
