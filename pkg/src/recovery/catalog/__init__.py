from recovery.catalog.closed_forms import CATALOG, black_scholes, exp_cir, log_dividend
from recovery.catalog.models import ClosedFormModel, ExpectedSet

__all__ = ["CATALOG", "ClosedFormModel", "ExpectedSet", "black_scholes", "exp_cir", "log_dividend"]
