"""Feller classification of the boundaries of dX = k dt + sigma dB.

With gamma = exp(-int_xi 2k/sigma^2),

    Q(x) = 2 / (sigma^2 gamma) * int_xi^x gamma
    R(x) = gamma * int_xi^x 2 / (sigma^2 gamma)

a boundary is inaccessible iff R is not integrable near it; an inaccessible
boundary is an entrance if Q is integrable there and natural otherwise.
"""

import logging
import math
from typing import Tuple

import numpy as np

from recovery.boundary.integrals import log_partials, verdict
from recovery.boundary.models import BoundaryReport, Classification, IntegralVerdict
from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.model.coefficients import derive
from recovery.model.models import DerivedCoefficients, MarketModel
from recovery.odesolve.models import Side
from recovery.utils import log_cumulative_trapezoid

logger = logging.getLogger("boundary")

LOG_TWO = math.log(2.0)


def _outward(derived: DerivedCoefficients, values, side: Side):
    return derived.grid.outward(values, side)


def feller_verdicts(
    derived: DerivedCoefficients,
    side: Side,
    numerics: Numerics = DEFAULT_NUMERICS,
    log_gamma=None,
) -> Tuple[IntegralVerdict, IntegralVerdict]:
    """Verdicts for R and Q near one boundary.

    ``log_gamma`` overrides the scale density tabulated on the grid.
    """
    grid = derived.grid
    step = grid.step
    schedule = numerics.depth_schedule
    if log_gamma is None:
        log_gamma = derived.gamma_log_nodes
    lg = _outward(derived, log_gamma, side)
    log_s2 = np.log(_outward(derived, derived.sigma2_nodes, side))
    log_xu = np.log(_outward(derived, grid.x_u, side))

    log_speed = LOG_TWO - log_s2 - lg
    inner_r = log_cumulative_trapezoid(log_speed + log_xu, step)
    inner_q = log_cumulative_trapezoid(lg + log_xu, step)
    log_r = lg + inner_r
    log_q = log_speed + inner_q

    r_verdict = verdict(log_partials(log_r + log_xu, step, schedule))
    q_verdict = verdict(log_partials(log_q + log_xu, step, schedule))
    return r_verdict, q_verdict


def classification_from(r_verdict: IntegralVerdict, q_verdict: IntegralVerdict):
    if r_verdict.convergent:
        return Classification.ACCESSIBLE
    if not r_verdict.divergent:
        return Classification.INDETERMINATE
    if q_verdict.convergent:
        return Classification.ENTRANCE
    if q_verdict.divergent:
        return Classification.NATURAL
    return Classification.INDETERMINATE


def classify(
    model: MarketModel, side: Side, numerics: Numerics = DEFAULT_NUMERICS
) -> Classification:
    derived = derive(model, numerics)
    return classification_from(*feller_verdicts(derived, side, numerics))


def boundary_report(model: MarketModel, numerics: Numerics = DEFAULT_NUMERICS) -> BoundaryReport:
    derived = derive(model, numerics)
    diagnostics = {}
    sides = {}
    for side in ("left", "right"):
        r_verdict, q_verdict = feller_verdicts(derived, side, numerics)
        diagnostics[f"{side}_R"] = r_verdict
        diagnostics[f"{side}_Q"] = q_verdict
        sides[side] = classification_from(r_verdict, q_verdict)
        if sides[side] == Classification.INDETERMINATE:
            logger.warning(f"{side} boundary of {model.name} could not be classified")
    left_gamma, right_gamma = gamma_integral_verdicts(model, numerics)
    diagnostics["left_gamma"] = left_gamma
    diagnostics["right_gamma"] = right_gamma
    logger.info(f"Boundaries of {model.name}: left {sides['left'].value}, right {sides['right'].value}")
    return BoundaryReport(left=sides["left"], right=sides["right"], diagnostics=diagnostics)


def gamma_integral_verdicts(
    model: MarketModel, numerics: Numerics = DEFAULT_NUMERICS
) -> Tuple[IntegralVerdict, IntegralVerdict]:
    """Verdicts for the integrals of gamma toward the left and right boundary."""
    derived = derive(model, numerics)
    grid = derived.grid
    out = []
    for side in ("left", "right"):
        lg = _outward(derived, derived.gamma_log_nodes, side)
        log_xu = np.log(_outward(derived, grid.x_u, side))
        out.append(verdict(log_partials(lg + log_xu, grid.step, numerics.depth_schedule)))
    return out[0], out[1]
