"""Martingale property of exp(lambda t) h(X_t) / G_t.

The process is a true martingale iff the diffusion with drift
k + sigma^2 h'/h does not explode, which is the Feller test with the scale
density gamma / h^2.
"""

import logging
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from recovery.boundary.feller import feller_verdicts
from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.errors import IndeterminateError, ModelError
from recovery.martcrit.models import LambdaZero, MartingaleStatus, MartingaleVerdict
from recovery.model.coefficients import derive, working_grid
from recovery.model.models import MarketModel
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.shooting import critical_lambda, extremal_solution

logger = logging.getLogger("martcrit")


def _log_h_on_grid(model: MarketModel, solution: EigenSolution, numerics: Numerics):
    grid = working_grid(model, numerics)
    reach = numerics.depth_schedule.delta * numerics.depth_schedule.n_max
    if solution.u[0] > grid.u_xi - reach + 1e-9 or solution.u[-1] < grid.u_xi + reach - 1e-9:
        raise ModelError("solution does not cover the depth schedule on both sides")
    if solution.u.shape == grid.u.shape and np.array_equal(solution.u, grid.u):
        return solution.log_h
    return np.interp(grid.u, solution.u, solution.log_h)


def martingale_check(
    model: MarketModel, solution: EigenSolution, numerics: Numerics = DEFAULT_NUMERICS
) -> MartingaleVerdict:
    derived = derive(model, numerics)
    log_h = _log_h_on_grid(model, solution, numerics)
    log_gamma_h = derived.gamma_log_nodes - 2.0 * log_h
    left, _ = feller_verdicts(derived, "left", numerics, log_gamma=log_gamma_h)
    right, _ = feller_verdicts(derived, "right", numerics, log_gamma=log_gamma_h)

    if left.divergent and right.divergent:
        status = MartingaleStatus.MARTINGALE
    elif left.convergent or right.convergent:
        status = MartingaleStatus.STRICT_LOCAL
    else:
        status = MartingaleStatus.INDETERMINATE
        logger.warning(f"Martingale status at lambda={solution.lam} is indeterminate")
    return MartingaleVerdict(
        lam=solution.lam, status=status, left_integral=left, right_integral=right
    )


def induced_diffusion(model: MarketModel, solution: EigenSolution) -> MarketModel:
    """dX = (k + sigma^2 h'/h) dt + sigma dB, with r = v = 0."""
    chart = model.chart
    log_derivative = PchipInterpolator(solution.u, solution.log_derivative)

    def b(x):
        sigma = model.sigma(x)
        return model.k(x) + sigma * sigma * log_derivative(chart.to_u(x))

    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return MarketModel(
        b=b,
        sigma=model.sigma,
        r=zero,
        v=zero,
        xi=model.xi,
        domain=model.domain,
        name=f"induced({model.name}, lambda={solution.lam})",
    )


def _status_at(model, lam, numerics):
    solution = extremal_solution(model, lam, numerics)
    return martingale_check(model, solution, numerics)


def lambda_zero(
    model: MarketModel,
    lambda_search_floor: float | None = None,
    numerics: Numerics = DEFAULT_NUMERICS,
    lambda_bar: float | None = None,
) -> LambdaZero:
    """Infimum of the martingale set, by bisection of the status at slope M."""
    if lambda_bar is None:
        critical = critical_lambda(model, numerics)
        lambda_bar, r_bar = critical.lambda_bar, critical.r_bar
    else:
        r_bar = derive(model, numerics).r_bar
    floor = lambda_search_floor
    if floor is None:
        floor = r_bar - 50.0 * (1.0 + abs(r_bar))
    if not floor < lambda_bar:
        raise ModelError(f"search floor {floor} must lie below lambda_bar={lambda_bar}")

    at_floor = _status_at(model, floor, numerics)
    if at_floor.status == MartingaleStatus.INDETERMINATE:
        raise IndeterminateError(f"martingale status undecided at the search floor {floor}")
    if at_floor.status == MartingaleStatus.MARTINGALE:
        logger.info(f"Martingale down to the search floor {floor}; lambda_zero is -inf")
        return LambdaZero(lambda_zero=-math.inf, floor=floor, floor_hit=True)

    at_top = _status_at(model, lambda_bar, numerics)
    if at_top.status == MartingaleStatus.INDETERMINATE:
        raise IndeterminateError(f"martingale status undecided at lambda_bar={lambda_bar}")
    if at_top.status == MartingaleStatus.STRICT_LOCAL:
        logger.info(f"No martingale candidate up to lambda_bar={lambda_bar}")
        return LambdaZero(lambda_zero=None, floor=floor, floor_hit=False, empty=True)

    lo, hi = floor, lambda_bar
    iterations = 0
    while hi - lo > numerics.lambda_zero_tol:
        mid = 0.5 * (lo + hi)
        status = _status_at(model, mid, numerics).status
        if status == MartingaleStatus.INDETERMINATE:
            raise IndeterminateError(
                f"martingale status undecided at lambda={mid} inside bracket [{lo}, {hi}]"
            )
        if status == MartingaleStatus.MARTINGALE:
            hi = mid
        else:
            lo = mid
        iterations += 1
    logger.info(f"lambda_zero for {model.name}: {hi:.6g} after {iterations} bisections")
    return LambdaZero(
        lambda_zero=hi, floor=floor, floor_hit=False, bracket=(lo, hi), iterations=iterations
    )
