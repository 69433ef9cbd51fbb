from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel


class Classification(str, Enum):
    NATURAL = "natural"
    ENTRANCE = "entrance"
    ACCESSIBLE = "accessible"
    INDETERMINATE = "indeterminate"

    @property
    def inaccessible(self) -> bool:
        return self in (Classification.NATURAL, Classification.ENTRANCE)


class VerdictKind(str, Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    INDETERMINATE = "indeterminate"


class IntegralVerdict(BaseModel):
    """Outcome of an improper-integral test.

    ``log_trace`` holds the natural log of the partial integrals at the
    geometric truncation depths; ``value`` is set only when convergent.
    """

    kind: VerdictKind
    value: Optional[float] = None
    log_trace: List[float]
    rule: str

    @property
    def convergent(self) -> bool:
        return self.kind == VerdictKind.CONVERGENT

    @property
    def divergent(self) -> bool:
        return self.kind == VerdictKind.DIVERGENT


class BoundaryReport(BaseModel):
    left: Classification
    right: Classification
    diagnostics: Dict[str, IntegralVerdict]

    @property
    def non_explosive(self) -> bool:
        """Both boundaries inaccessible, i.e. R divergent at both ends."""
        left_r = self.diagnostics.get("left_R")
        right_r = self.diagnostics.get("right_R")
        if left_r is None or right_r is None:
            return self.left.inaccessible and self.right.inaccessible
        return left_r.divergent and right_r.divergent
