import math

import numpy as np
import pytest

from recovery.catalog.closed_forms import black_scholes, exp_cir, log_dividend
from recovery.errors import HypothesisError, NotAdmissibleError
from recovery.model.models import MarketModel
from recovery.odesolve.models import EigenSolution, ZeroCrossing
from recovery.odesolve.residual import residual
from recovery.odesolve.shooting import (
    critical_lambda,
    extremal_solution,
    integrate,
    local_roots,
    slope_bounds,
)

BS_PARAMETERS = [
    ((0.05, 0.02, 0.2), 0.05125),
    ((0.02, 0.015, 0.3), 0.02888888888888889),
    ((0.03, 0.03, 0.25), 0.0378125),
]


@pytest.fixture(scope="module")
def bs():
    return black_scholes(0.05, 0.02, 0.2, 1.0)


def _bs_exponents(r, delta, sigma, lam):
    c = 0.5 - (r - delta) / sigma**2
    root = math.sqrt(c * c + 2.0 * (r - lam) / sigma**2)
    return c + root, c - root


def test_closed_form_slope_at_zero(bs):
    assert bs.m_slope(0.0) == pytest.approx(-0.25 + math.sqrt(2.5625), rel=1e-15)
    assert bs.m_slope(0.0) == pytest.approx(1.3507810594, rel=1e-10)


def test_local_roots_of_geometric_brownian_motion(bs):
    mu_plus, mu_minus = local_roots(bs.model, 0.0, -7.0)
    expected = _bs_exponents(0.05, 0.02, 0.2, 0.0)
    assert mu_plus == pytest.approx(expected[0], rel=1e-12)
    assert mu_minus == pytest.approx(expected[1], rel=1e-12)
    assert local_roots(bs.model, 0.06, 0.0) is None


def test_constant_solution_at_lambda_equal_r(bs):
    for side in ("left", "right"):
        solution = integrate(bs.model, 0.05, 0.0, side)
        assert isinstance(solution, EigenSolution)
        assert np.max(np.abs(solution.values() - 1.0)) <= 1e-9


def test_second_solution_at_lambda_equal_r():
    # gamma(s) = s^(-1/9), so h(x) = int_0^x gamma / int_0^xi gamma = x^(8/9)
    model = black_scholes(0.02, 0.015, 0.3, 1.0).model
    power = 1.0 - 2.0 * 0.005 / 0.09
    for side in ("left", "right"):
        solution = integrate(model, 0.02, power, side)
        window = np.abs(solution.u) <= 8.0
        expected = power * np.log(solution.x[window])
        assert np.allclose(solution.log_h[window], expected, rtol=1e-7, atol=1e-9)


def test_slope_above_maximum_vanishes_left_of_xi(bs):
    mu_plus, mu_minus = _bs_exponents(0.05, 0.02, 0.2, 0.0)
    slope = mu_plus + 1.0
    crossing = integrate(bs.model, 0.0, slope, "left")
    assert isinstance(crossing, ZeroCrossing)
    assert crossing.side == "left"
    # h = A e^(mu_plus u) + B e^(mu_minus u) with A + B = 1
    b = (mu_plus - slope) / (mu_plus - mu_minus)
    u0 = math.log(-b / (1.0 - b)) / (mu_plus - mu_minus)
    assert crossing.x0 < 1.0
    assert crossing.x0 == pytest.approx(math.exp(u0), rel=1e-6)


def test_integrated_solution_is_sorted_and_normalised(bs):
    m = bs.m_slope(0.0)
    solution = integrate(bs.model, 0.0, m, "right")
    assert solution.x[0] == 1.0
    assert solution.values()[0] == 1.0
    window = solution.u <= 10.0
    assert np.allclose(solution.log_h[window], m * solution.u[window], rtol=1e-7, atol=1e-9)


def test_rescaling_keeps_log_values_continuous(bs):
    solution = integrate(bs.model, -5.0, bs.m_slope(-5.0), "right")
    assert np.ptp(solution.rescale_log) > 0
    steps = np.diff(solution.log_h)
    assert np.allclose(steps, steps[0], rtol=1e-6)


@pytest.mark.parametrize("lam", list(np.linspace(-0.05, 0.05125, 9)))
def test_extremal_slope_matches_closed_form(bs, lam):
    candidate = slope_bounds(bs.model, lam)
    if lam < bs.lambda_bar:
        assert candidate.nonempty
    assert candidate.M_lambda == pytest.approx(bs.m_slope(lam), rel=1e-4)


def test_lower_slope_matches_smaller_exponent(bs):
    candidate = slope_bounds(bs.model, 0.0)
    assert candidate.m_lambda == pytest.approx(_bs_exponents(0.05, 0.02, 0.2, 0.0)[1], rel=1e-4)
    assert candidate.width > 0
    assert not candidate.indeterminate


def test_slice_is_empty_above_critical(bs):
    assert not slope_bounds(bs.model, 0.06).nonempty


def test_very_negative_lambda_has_slopes_of_both_signs(bs):
    candidate = slope_bounds(bs.model, 0.05 - 10.0)
    assert candidate.nonempty
    assert candidate.M_lambda > 0 > candidate.m_lambda


def test_slopes_inside_slice_stay_positive(bs):
    candidate = slope_bounds(bs.model, 0.0)
    rng = np.random.default_rng(3)
    for z in rng.uniform(candidate.m_lambda, candidate.M_lambda, 5):
        for side in ("left", "right"):
            assert isinstance(integrate(bs.model, 0.0, float(z), side), EigenSolution)


def test_maximal_slope_is_nonincreasing_in_lambda(bs):
    slopes = [slope_bounds(bs.model, lam).M_lambda for lam in np.linspace(-0.5, 0.05, 6)]
    assert all(a >= b for a, b in zip(slopes, slopes[1:]))


@pytest.mark.parametrize("params, expected", BS_PARAMETERS)
def test_critical_lambda_of_black_scholes(params, expected):
    closed = black_scholes(*params, 1.0)
    assert closed.lambda_bar == pytest.approx(expected, rel=1e-12)
    critical = critical_lambda(closed.model)
    assert critical.lambda_bar == pytest.approx(expected, abs=1e-4)
    assert critical.lambda_bar >= critical.r_bar
    assert critical.r_bar == pytest.approx(params[0])


def test_critical_lambda_of_exp_cir():
    closed = exp_cir(0.05, 0.01, 0.2, 2.0)
    assert critical_lambda(closed.model).lambda_bar == pytest.approx(0.05, abs=1e-4)


def test_critical_lambda_needs_nonnegative_rate():
    model = MarketModel(
        b=lambda x: 0.03 * x,
        sigma=lambda x: 0.2 * x,
        r=lambda x: -0.01 + 0.0 * x,
        v=lambda x: 0.2 + 0.0 * x,
        xi=1.0,
    )
    with pytest.raises(HypothesisError):
        critical_lambda(model)


@pytest.mark.parametrize("lam", [0.04, 0.0])
def test_exp_cir_slope_matches_kummer_ratio(lam):
    closed = exp_cir(0.05, 0.01, 0.2, 2.0)
    candidate = slope_bounds(closed.model, lam)
    assert candidate.M_lambda == pytest.approx(closed.price_slope(lam), rel=1e-3)
    assert closed.price_slope(lam) == pytest.approx(closed.m_slope(lam), rel=1e-10)


def test_log_dividend_slope_matches_closed_form():
    closed = log_dividend(0.05, 0.1, 0.2, 1.0)
    lam = 0.03
    assert slope_bounds(closed.model, lam).M_lambda == pytest.approx(closed.m_slope(lam), rel=1e-3)


def test_extremal_solution_is_normalised_at_xi(bs):
    solution = extremal_solution(bs.model, 0.0)
    c = int(np.argmin(np.abs(solution.u)))
    assert solution.x[c] == 1.0
    assert solution.log_h[c] == pytest.approx(0.0, abs=1e-15)
    assert solution.slope == pytest.approx(bs.m_slope(0.0), rel=1e-6)
    assert solution.truncation == (solution.x[0], solution.x[-1])
    assert np.all(np.isfinite(solution.log_h))


def test_extremal_solution_above_critical_is_rejected(bs):
    with pytest.raises(NotAdmissibleError):
        extremal_solution(bs.model, 0.06)


@pytest.mark.parametrize(
    "build, params", [(black_scholes, (0.05, 0.02, 0.2, 1.0)), (log_dividend, (0.05, 0.1, 0.2, 1.0))]
)
def test_larger_lambda_has_smaller_log_derivative(build, params):
    closed = build(*params)
    g = extremal_solution(closed.model, 0.0)
    h = extremal_solution(closed.model, 0.04)
    assert np.all(g.log_derivative > h.log_derivative - 1e-9)


def test_closed_form_residual_is_small(bs):
    u = np.arange(-5.0, 5.0 + 1e-9, 0.01)
    x = np.exp(u)
    solution = EigenSolution.from_log(0.0, bs.m_slope(0.0), u, x, bs.log_h(0.0, x), bs.dlog_h(0.0, x))
    assert residual(bs.model, solution) <= 1e-6


def test_constant_solution_has_zero_residual(bs):
    u = np.linspace(-3.0, 3.0, 61)
    solution = EigenSolution.from_log(0.05, 0.0, u, np.exp(u), np.zeros_like(u), np.zeros_like(u))
    assert residual(bs.model, solution) <= 1e-15


def test_perturbed_solution_has_large_residual():
    closed = black_scholes(0.05, 0.02, 0.5, 1.0)
    m = closed.m_slope(0.0)
    u = np.arange(-5.0, 5.0 + 1e-9, 0.01)
    x = np.exp(u)
    eps = 0.01
    log_h = m * u + np.log1p(eps * np.sin(u))
    dlog_h = m / x + eps * np.cos(u) / (x * (1.0 + eps * np.sin(u)))
    solution = EigenSolution.from_log(0.0, m, u, x, log_h, dlog_h)
    assert residual(closed.model, solution) > 1e-3


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_residual_on_short_grids(bs, n):
    u = np.linspace(-1.0, 1.0, n)
    x = np.exp(u)
    solution = EigenSolution.from_log(0.0, bs.m_slope(0.0), u, x, bs.log_h(0.0, x), bs.dlog_h(0.0, x))
    assert residual(bs.model, solution) <= 1e-6


def test_residual_on_short_grid_sees_a_wrong_slope(bs):
    u = np.linspace(-1.0, 1.0, 3)
    x = np.exp(u)
    solution = EigenSolution.from_log(0.0, 1.0, u, x, u, 1.0 / x)
    assert residual(bs.model, solution) > 1e-3


@pytest.mark.parametrize(
    "build, params, lam",
    [
        (black_scholes, (0.05, 0.02, 0.2, 1.0), 0.0),
        (black_scholes, (0.05, 0.02, 0.2, 1.0), -0.1),
        (log_dividend, (0.05, 0.1, 0.2, 1.0), 0.03),
    ],
)
def test_no_interior_extremum_below_short_rate(build, params, lam):
    solution = extremal_solution(build(*params).model, lam)
    signs = np.sign(solution.dh[solution.dh != 0])
    assert signs.size > 0
    assert np.all(signs == signs[0])


@pytest.mark.parametrize("lam", [0.022, 0.025, 0.028])
def test_increasing_above_short_rate_when_gamma_diverges(lam):
    # r constant at 0.02, right gamma integral divergent, lambda_bar = 0.0288889
    flat = black_scholes(0.02, 0.015, 0.3, 1.0)
    solution = extremal_solution(flat.model, lam)
    assert np.all(solution.dh > 0)
