import math

import numpy as np
import pytest

from recovery.boundary.feller import boundary_report
from recovery.catalog.closed_forms import black_scholes, exp_cir, log_dividend
from recovery.errors import ModelError
from recovery.exprdsl.evaluator import compile_expr
from recovery.martcrit.criteria import induced_diffusion, lambda_zero, martingale_check
from recovery.martcrit.models import MartingaleStatus
from recovery.model.coefficients import working_grid
from recovery.model.models import Domain, MarketModel
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.shooting import extremal_solution


@pytest.fixture(scope="module")
def bs():
    return black_scholes(0.05, 0.02, 0.2, 1.0)


@pytest.fixture(scope="module")
def brownian():
    zero = compile_expr("0")
    return MarketModel(
        b=zero, sigma=compile_expr("1"), r=zero, v=zero, xi=1.0, domain=Domain(lo=0.0)
    )


def _constant_solution(model, lam, log_scale=0.0):
    grid = working_grid(model)
    return EigenSolution.from_log(lam, 0.0, grid.u, grid.x, log_scale, 0.0)


def _rescaled(solution, factor):
    return EigenSolution.from_log(
        solution.lam,
        solution.slope,
        solution.u,
        solution.x,
        solution.log_h + math.log(factor),
        solution.log_derivative,
    )


def test_extremal_black_scholes_solution_is_martingale(bs):
    solution = extremal_solution(bs.model, 0.0)
    verdict = martingale_check(bs.model, solution)
    assert verdict.status == MartingaleStatus.MARTINGALE
    assert verdict.left_integral.divergent
    assert verdict.right_integral.divergent


def test_constant_solution_at_short_rate_is_martingale(bs):
    verdict = martingale_check(bs.model, _constant_solution(bs.model, 0.05))
    assert verdict.status == MartingaleStatus.MARTINGALE


def test_exp_cir_solution_is_martingale():
    closed = exp_cir(0.05, 0.01, 0.2, 2.0)
    solution = extremal_solution(closed.model, 0.04)
    assert martingale_check(closed.model, solution).status == MartingaleStatus.MARTINGALE


def test_induced_diffusion_reaching_zero_is_strict_local(brownian):
    verdict = martingale_check(brownian, _constant_solution(brownian, 0.0))
    assert verdict.status == MartingaleStatus.STRICT_LOCAL
    assert verdict.left_integral.convergent


@pytest.mark.parametrize("factor", [0.1, 10.0])
def test_status_ignores_normalization(bs, factor):
    solution = extremal_solution(bs.model, 0.02)
    base = martingale_check(bs.model, solution).status
    assert martingale_check(bs.model, _rescaled(solution, factor)).status == base


def test_shallow_solution_is_rejected(bs):
    closed_u = np.linspace(-5.0, 5.0, 1001)
    solution = EigenSolution.from_log(
        0.0, bs.m_slope(0.0), closed_u, np.exp(closed_u), bs.m_slope(0.0) * closed_u, 0.0
    )
    with pytest.raises(ModelError):
        martingale_check(bs.model, solution)


@pytest.mark.parametrize(
    "build, params, lam",
    [
        (black_scholes, (0.05, 0.02, 0.2, 1.0), 0.0),
        (exp_cir, (0.05, 0.01, 0.2, 2.0), 0.04),
        (log_dividend, (0.05, 0.1, 0.2, 1.0), 0.03),
    ],
)
def test_criterion_agrees_with_induced_explosion_test(build, params, lam):
    model = build(*params).model
    solution = extremal_solution(model, lam)
    status = martingale_check(model, solution).status
    report = boundary_report(induced_diffusion(model, solution))
    assert report.non_explosive == (status == MartingaleStatus.MARTINGALE)


def test_induced_diffusion_of_brownian_motion_hits_zero(brownian):
    report = boundary_report(induced_diffusion(brownian, _constant_solution(brownian, 0.0)))
    assert not report.non_explosive


def test_martingale_statuses_switch_at_most_once(bs):
    lams = np.linspace(-0.3, bs.lambda_bar - 0.001, 8)
    statuses = [
        martingale_check(bs.model, extremal_solution(bs.model, float(lam))).status
        for lam in lams
    ]
    assert MartingaleStatus.INDETERMINATE not in statuses
    switches = sum(a != b for a, b in zip(statuses, statuses[1:]))
    assert switches <= 1
    # strict local martingales can only sit below the martingale part
    if switches:
        assert statuses[0] == MartingaleStatus.STRICT_LOCAL


def test_black_scholes_lambda_zero_hits_floor(bs):
    result = lambda_zero(bs.model, lambda_search_floor=-1.0, lambda_bar=bs.lambda_bar)
    assert result.floor_hit
    assert result.lambda_zero == -math.inf
    assert not result.empty


def test_lambda_zero_needs_floor_below_lambda_bar(bs):
    with pytest.raises(ModelError):
        lambda_zero(bs.model, lambda_search_floor=0.1, lambda_bar=bs.lambda_bar)
