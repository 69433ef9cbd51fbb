import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from recovery.boundary.feller import boundary_report
from recovery.config import DEFAULT_NUMERICS, Numerics, settings
from recovery.martcrit.criteria import lambda_zero, martingale_check
from recovery.model.models import MarketModel
from recovery.odesolve.shooting import critical_lambda, extremal_solution
from recovery.recover.models import AdmissibleSample, AdmissibleSet
from recovery.usualset.models import InclusionFlag
from recovery.usualset.usual import lambda_one, usual_check

logger = logging.getLogger("recover")

DEFAULT_SAMPLES = 9


def _sample(model, lam, report, numerics, lambda_bar) -> AdmissibleSample:
    solution = extremal_solution(model, lam, numerics)
    martingale = martingale_check(model, solution, numerics)
    usual = usual_check(model, solution, report, numerics, lambda_bar)
    return AdmissibleSample(
        lam=lam, m_slope=solution.slope, martingale=martingale.status, usual=usual.status
    )


def sample_lambdas(lo: float, hi: float, hi_included: bool, n: int, span: float):
    """n values spread over [lo, hi], ending at hi or just below it.

    An unbounded lo is replaced by hi - span.
    """
    start = lo if math.isfinite(lo) else hi - span
    if hi_included:
        return np.linspace(start, hi, n)
    return np.linspace(start, hi, n + 1)[:-1]


def admissible_set(
    model: MarketModel,
    n_samples: int = DEFAULT_SAMPLES,
    numerics: Numerics = DEFAULT_NUMERICS,
) -> AdmissibleSet:
    """Intersect the martingale and usual sets and sample M_lambda across it."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    critical = critical_lambda(model, numerics)
    lambda_bar = critical.lambda_bar
    report = boundary_report(model, numerics)

    usual = lambda_one(model, report, numerics, lambda_bar)
    if usual.empty:
        logger.info(f"Admissible set of {model.name} is empty: {usual.reason}")
        return AdmissibleSet(lambda_bar=lambda_bar, empty=True, reason=usual.reason)

    martingale = lambda_zero(model, None, numerics, lambda_bar)
    if martingale.empty:
        reason = "martingale set empty"
        logger.info(f"Admissible set of {model.name} is empty: {reason}")
        return AdmissibleSet(lambda_bar=lambda_bar, empty=True, reason=reason)

    lo = martingale.lambda_zero
    hi = usual.lambda_one
    lo_included = InclusionFlag.INCLUDED if math.isfinite(lo) else None
    hi_included = usual.hi_included
    if lo > hi or (lo == hi and hi_included != InclusionFlag.INCLUDED):
        reason = "no candidate below lambda_bar"
        logger.info(f"Admissible set of {model.name} is empty: {reason}")
        return AdmissibleSet(
            lambda_lo=lo,
            lo_included=lo_included,
            lambda_hi=hi,
            hi_included=hi_included,
            lambda_bar=lambda_bar,
            empty=True,
            reason=reason,
        )

    lams = sample_lambdas(
        lo, hi, hi_included == InclusionFlag.INCLUDED, n_samples, numerics.grid_span
    )
    with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
        samples = list(
            pool.map(lambda lam: _sample(model, float(lam), report, numerics, lambda_bar), lams)
        )
    logger.info(
        f"Admissible set of {model.name}: lo={lo}, hi={hi}, "
        f"{len(samples)} samples from {float(lams[0]):.6g}"
    )
    return AdmissibleSet(
        lambda_lo=lo,
        lo_included=lo_included,
        lambda_hi=hi,
        hi_included=hi_included,
        lambda_bar=lambda_bar,
        samples=samples,
        sampled_lo=float(lams[0]),
        empty=False,
    )
