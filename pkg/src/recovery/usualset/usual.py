"""Usual conditions for the M-slope solution: h > 0, h' > 0, h(lo+) = 0 and
h(inf) = inf.

Exact criteria are used whenever the boundary classification and a constant
short rate allow it; otherwise the conditions are judged from the samples.
"""

import logging
import math

import numpy as np

from recovery.boundary.models import BoundaryReport, Classification, VerdictKind
from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.errors import IndeterminateError
from recovery.model.coefficients import derive
from recovery.model.models import MarketModel
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.shooting import critical_lambda, extremal_solution
from recovery.usualset.models import (
    CONDITIONS,
    ConditionStatus,
    DecisionPath,
    InclusionFlag,
    LambdaOne,
    Rationale,
    UsualStatus,
    UsualVerdict,
)

logger = logging.getLogger("usualset")

LOG_SMALL = math.log(1e-6)
LOG_LARGE = math.log(1e6)
TREND_FRACTIONS = (1.0 / 3.0, 2.0 / 3.0, 1.0)
LAMBDA_MATCH = 10.0

# condition a theorem-based rejection is attributed to
_FAILING = {
    DecisionPath.ENTRANCE_LEFT: "left_limit_zero",
    DecisionPath.CONSTANT_R_CRITICAL_AT_R: "strict_increase",
    DecisionPath.CONSTANT_R_GAMMA_CONVERGENT: "right_limit_infinity",
    DecisionPath.ABOVE_CRITICAL: "positivity",
}


def _trend(values, decreasing: bool, limit: float) -> ConditionStatus:
    steps = np.diff(values)
    if decreasing:
        ok = bool(np.all(steps < 0)) and values[-1] < limit
    else:
        ok = bool(np.all(steps > 0)) and values[-1] > limit
    return ConditionStatus.PASS if ok else ConditionStatus.INDETERMINATE


def numeric_conditions(solution: EigenSolution, xi: float, chart) -> dict:
    """Judge the four conditions from the sampled solution."""
    u_xi = float(chart.to_u(xi))
    log_h = solution.log_h
    depth = min(u_xi - solution.u[0], solution.u[-1] - u_xi)
    left_u = [u_xi - f * depth for f in TREND_FRACTIONS]
    right_u = [u_xi + f * depth for f in TREND_FRACTIONS]
    return {
        "positivity": ConditionStatus.PASS if np.all(solution.h > 0) else ConditionStatus.FAIL,
        "strict_increase": (
            ConditionStatus.PASS if np.all(solution.dh > 0) else ConditionStatus.FAIL
        ),
        "left_limit_zero": _trend(np.interp(left_u, solution.u, log_h), True, LOG_SMALL),
        "right_limit_infinity": _trend(np.interp(right_u, solution.u, log_h), False, LOG_LARGE),
    }


def _verdict(lam, status, numeric, rationale, path):
    if rationale == Rationale.NUMERIC:
        conditions = dict(numeric)
    elif status == UsualStatus.USUAL:
        conditions = {name: ConditionStatus.PASS for name in CONDITIONS}
    else:
        conditions = dict(numeric)
        failing = _FAILING.get(path)
        if failing and status == UsualStatus.NOT_USUAL:
            conditions[failing] = ConditionStatus.FAIL
    return UsualVerdict(
        lam=lam,
        status=status,
        conditions=conditions,
        numeric=numeric,
        rationale=rationale,
        path=path,
    )


def _constant_rate_decision(lam, r, lambda_bar, report: BoundaryReport, tol):
    """(status, path) from the gamma integrals for a constant short rate, or None."""
    left_gamma = report.diagnostics["left_gamma"]
    right_gamma = report.diagnostics["right_gamma"]
    if lam > lambda_bar + tol:
        return UsualStatus.NOT_USUAL, DecisionPath.ABOVE_CRITICAL
    if abs(lambda_bar - r) <= tol:
        if lam < r - tol:
            return UsualStatus.USUAL, DecisionPath.CONSTANT_R_CRITICAL_AT_R
        if right_gamma.divergent and left_gamma.convergent:
            return UsualStatus.USUAL, DecisionPath.CONSTANT_R_CRITICAL_AT_R
        if VerdictKind.INDETERMINATE in (left_gamma.kind, right_gamma.kind):
            return None
        return UsualStatus.NOT_USUAL, DecisionPath.CONSTANT_R_CRITICAL_AT_R
    if right_gamma.divergent:
        if lam < lambda_bar - tol:
            return UsualStatus.USUAL, DecisionPath.CONSTANT_R_CRITICAL_ABOVE_R
        if report.right == Classification.NATURAL:
            return UsualStatus.USUAL, DecisionPath.CONSTANT_R_NATURAL_RIGHT
        return UsualStatus.INDETERMINATE, DecisionPath.CONSTANT_R_CRITICAL_ABOVE_R
    if right_gamma.convergent:
        status = UsualStatus.USUAL if lam < r else UsualStatus.NOT_USUAL
        return status, DecisionPath.CONSTANT_R_GAMMA_CONVERGENT
    return None


def usual_check(
    model: MarketModel,
    solution: EigenSolution,
    boundary_report: BoundaryReport,
    numerics: Numerics = DEFAULT_NUMERICS,
    lambda_bar: float | None = None,
) -> UsualVerdict:
    """Decide whether (lambda, M_lambda) satisfies the usual conditions."""
    lam = solution.lam
    derived = derive(model, numerics)
    numeric = numeric_conditions(solution, model.xi, model.chart)

    if boundary_report.left == Classification.ENTRANCE:
        return _verdict(
            lam, UsualStatus.NOT_USUAL, numeric, Rationale.THEOREM, DecisionPath.ENTRANCE_LEFT
        )

    left_rates = derived.r_nodes[: derived.grid.center + 1]
    bounded = bool(np.all(np.isfinite(left_rates)) and np.all(left_rates >= 0))
    natural_left = boundary_report.left == Classification.NATURAL
    if natural_left and bounded and lam < derived.r_bar:
        return _verdict(
            lam, UsualStatus.USUAL, numeric, Rationale.THEOREM, DecisionPath.NATURAL_LEFT_BELOW_R
        )

    if natural_left and derived.r_is_constant:
        if lambda_bar is None:
            lambda_bar = critical_lambda(model, numerics).lambda_bar
        r = float(derived.r_nodes[derived.grid.center])
        decision = _constant_rate_decision(
            lam, r, lambda_bar, boundary_report, LAMBDA_MATCH * numerics.bisect_tol_lambda
        )
        if decision is not None:
            status, path = decision
            if status == UsualStatus.INDETERMINATE:
                logger.warning(f"Usual status at lambda={lam} is undecided ({path.value})")
            return _verdict(lam, status, numeric, Rationale.THEOREM, path)

    if ConditionStatus.FAIL in (numeric["positivity"], numeric["strict_increase"]):
        status = UsualStatus.NOT_USUAL
    elif all(v == ConditionStatus.PASS for v in numeric.values()):
        status = UsualStatus.USUAL
    else:
        status = UsualStatus.INDETERMINATE
        logger.warning(f"Usual status at lambda={lam} is undecided by the sampled trends")
    return _verdict(lam, status, numeric, Rationale.NUMERIC, DecisionPath.NUMERIC)


def _status(model, lam, report, numerics, lambda_bar):
    solution = extremal_solution(model, lam, numerics)
    return usual_check(model, solution, report, numerics, lambda_bar).status


def lambda_one(
    model: MarketModel,
    boundary_report: BoundaryReport,
    numerics: Numerics = DEFAULT_NUMERICS,
    lambda_bar: float | None = None,
) -> LambdaOne:
    """Supremum of the usual set and whether it belongs to the set."""
    if boundary_report.left == Classification.ENTRANCE:
        return LambdaOne(
            lambda_one=None,
            hi_included=None,
            empty=True,
            reason="usual set empty: entrance left boundary",
            path=DecisionPath.ENTRANCE_LEFT,
        )
    derived = derive(model, numerics)
    if lambda_bar is None:
        lambda_bar = critical_lambda(model, numerics).lambda_bar
    tol = LAMBDA_MATCH * numerics.bisect_tol_lambda

    if derived.r_is_constant and boundary_report.left == Classification.NATURAL:
        r = float(derived.r_nodes[derived.grid.center])
        left_gamma = boundary_report.diagnostics["left_gamma"]
        right_gamma = boundary_report.diagnostics["right_gamma"]
        if abs(lambda_bar - r) <= tol:
            if VerdictKind.INDETERMINATE in (left_gamma.kind, right_gamma.kind):
                flag = InclusionFlag.INDETERMINATE
            elif right_gamma.divergent and left_gamma.convergent:
                flag = InclusionFlag.INCLUDED
            else:
                flag = InclusionFlag.EXCLUDED
            return LambdaOne(
                lambda_one=r, hi_included=flag, path=DecisionPath.CONSTANT_R_CRITICAL_AT_R
            )
        if right_gamma.divergent:
            if boundary_report.right == Classification.NATURAL:
                return LambdaOne(
                    lambda_one=lambda_bar,
                    hi_included=InclusionFlag.INCLUDED,
                    path=DecisionPath.CONSTANT_R_NATURAL_RIGHT,
                )
            logger.warning("Membership of lambda_bar in the usual set is undecided")
            return LambdaOne(
                lambda_one=lambda_bar,
                hi_included=InclusionFlag.INDETERMINATE,
                path=DecisionPath.CONSTANT_R_CRITICAL_ABOVE_R,
            )
        if right_gamma.convergent:
            return LambdaOne(
                lambda_one=r,
                hi_included=InclusionFlag.EXCLUDED,
                path=DecisionPath.CONSTANT_R_GAMMA_CONVERGENT,
            )

    top = _status(model, lambda_bar, boundary_report, numerics, lambda_bar)
    if top == UsualStatus.USUAL:
        return LambdaOne(
            lambda_one=lambda_bar, hi_included=InclusionFlag.INCLUDED, path=DecisionPath.NUMERIC
        )
    if top == UsualStatus.INDETERMINATE:
        logger.warning(f"Usual status at lambda_bar={lambda_bar} is undecided")
        return LambdaOne(
            lambda_one=lambda_bar,
            hi_included=InclusionFlag.INDETERMINATE,
            path=DecisionPath.NUMERIC,
        )

    r_bar = derived.r_bar
    lo = min(r_bar, lambda_bar) - 1.0
    bottom = _status(model, lo, boundary_report, numerics, lambda_bar)
    if bottom == UsualStatus.INDETERMINATE:
        raise IndeterminateError(f"usual status undecided at lambda={lo}")
    if bottom == UsualStatus.NOT_USUAL:
        return LambdaOne(
            lambda_one=None,
            hi_included=None,
            empty=True,
            reason="usual set empty",
            path=DecisionPath.NUMERIC,
        )
    hi = lambda_bar
    while hi - lo > numerics.lambda_one_tol:
        mid = 0.5 * (lo + hi)
        status = _status(model, mid, boundary_report, numerics, lambda_bar)
        if status == UsualStatus.INDETERMINATE:
            raise IndeterminateError(f"usual status undecided at lambda={mid}")
        if status == UsualStatus.USUAL:
            lo = mid
        else:
            hi = mid
    logger.info(f"lambda_one for {model.name}: {lo:.6g}")
    return LambdaOne(lambda_one=lo, hi_included=InclusionFlag.INCLUDED, path=DecisionPath.NUMERIC)
