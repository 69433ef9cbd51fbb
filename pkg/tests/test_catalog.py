import math

import numpy as np
import pytest

from recovery.catalog import CATALOG, black_scholes, exp_cir, log_dividend
from recovery.catalog.closed_forms import RESIDUAL_LIMIT, _log_dividend_terms
from recovery.errors import ModelError, NotAvailableError
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.residual import residual
from recovery.specfun.gamma import log_gamma


def _residual_at(closed, lam, halfwidth=5.0):
    chart = closed.model.chart
    u = chart.to_u(closed.model.xi) + np.arange(-halfwidth, halfwidth + 1e-9, 0.01)
    x = np.asarray(chart.to_x(u), dtype=float)
    solution = EigenSolution.from_log(
        lam, closed.m_slope(lam), u, x, closed.log_h(lam, x), closed.dlog_h(lam, x)
    )
    return residual(closed.model, solution)


@pytest.fixture(scope="module")
def models():
    return {
        "black_scholes": black_scholes(0.05, 0.02, 0.2, 1.0),
        "exp_cir": exp_cir(0.05, 0.01, 0.2, 2.0),
        "log_dividend": log_dividend(0.05, 0.1, 0.2, 1.0),
    }


def test_catalog_lists_the_three_families():
    assert sorted(CATALOG) == ["black_scholes", "exp_cir", "log_dividend"]


@pytest.mark.parametrize("family", ["black_scholes", "exp_cir", "log_dividend"])
def test_check_residuals_are_small(models, family):
    closed = models[family]
    assert closed.family == family
    assert closed.check_residual <= RESIDUAL_LIMIT


@pytest.mark.parametrize("family", ["black_scholes", "exp_cir", "log_dividend"])
def test_normalized_at_xi(models, family):
    closed = models[family]
    lam = closed.check_lambda
    assert float(closed.log_h(lam, closed.model.xi)) == pytest.approx(0.0, abs=1e-12)
    assert float(closed.h(lam, closed.model.xi)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lam", [0.05, 0.03])
def test_log_dividend_residual_up_to_short_rate(models, lam):
    assert _residual_at(models["log_dividend"], lam) <= RESIDUAL_LIMIT


def test_black_scholes_constants(models):
    closed = models["black_scholes"]
    assert closed.lambda_bar == pytest.approx(0.05125, abs=1e-15)
    assert closed.m_slope(0.0) == pytest.approx(1.3507810594, rel=1e-10)
    assert closed.m_slope(closed.lambda_bar) == pytest.approx(-0.25, abs=1e-6)
    with pytest.raises(NotAvailableError):
        closed.m_slope(0.06)


def test_black_scholes_expected_sets(models):
    steep = models["black_scholes"].admissible_set_expected
    assert (steep.hi, steep.hi_included, steep.empty) == (0.05, False, False)
    assert steep.lo == -math.inf
    flat = black_scholes(0.02, 0.015, 0.3, 1.0)
    assert flat.lambda_bar == pytest.approx(0.0288888888888889, abs=1e-12)
    assert flat.admissible_set_expected.hi == flat.lambda_bar
    assert flat.admissible_set_expected.hi_included is True


def test_black_scholes_log_model_matches_price_model(models):
    closed = models["black_scholes"]
    y = np.linspace(-3.0, 3.0, 7)
    s = np.exp(y)
    log_model = closed.log_model
    assert log_model.k(y) == pytest.approx(closed.model.k(s) / s - 0.5 * 0.04, rel=1e-12)
    assert log_model.xi == 0.0


def test_exp_cir_requires_feller_and_xi_above_one():
    with pytest.raises(ModelError):
        exp_cir(0.05, 0.04, 0.2, 2.0)
    with pytest.raises(ModelError):
        exp_cir(0.05, 0.01, 0.2, 1.0)


def test_exp_cir_closed_form_stops_at_short_rate(models):
    closed = models["exp_cir"]
    assert closed.lambda_bar == 0.05
    with pytest.raises(NotAvailableError):
        closed.m_slope(0.051)
    assert closed.admissible_set_expected.empty
    assert closed.admissible_set_expected.reason == "usual set empty: entrance left boundary"


@pytest.mark.parametrize("lam", [0.04, 0.0, -0.1])
def test_exp_cir_price_slope_is_the_kummer_ratio(models, lam):
    closed = models["exp_cir"]
    assert closed.price_slope(lam) == pytest.approx(closed.m_slope(lam), rel=1e-10)


def test_exp_cir_constant_solution_at_short_rate(models):
    closed = models["exp_cir"]
    assert closed.price_slope(0.05) == 0.0
    assert closed.m_slope(0.05) == pytest.approx(0.0, abs=1e-15)


def test_exp_cir_log_slope_asymptote(models):
    # g'/g -> 1 + (a - b)/y with a = 2.5, b = 2
    closed = models["exp_cir"]
    y = 400.0
    s = math.exp(y)
    assert float(closed.dlog_h(0.0, s)) * s == pytest.approx(1.0 + 0.5 / y, abs=1e-5)


def test_log_dividend_tail_slope(models):
    closed = models["log_dividend"]
    kappa = closed.params["kappa"]
    scale = math.sqrt(0.1) / 0.2
    y = kappa + 20.0 / scale
    s = math.exp(y)
    slope_in_y = float(closed.dlog_h(0.03, s)) * s
    assert slope_in_y == pytest.approx(2.0 * 0.1 / 0.04 * (y - kappa), rel=1e-2)


def test_log_dividend_terms_at_kappa():
    a = 0.3
    log_g, ratio = _log_dividend_terms(a, 0.0)
    assert log_g == pytest.approx(-log_gamma(a + 0.5), abs=1e-14)
    assert ratio == pytest.approx(2.0 * math.exp(log_gamma(a + 0.5) - log_gamma(a)), rel=1e-12)


@pytest.mark.parametrize("a", [0.1, 0.3, 1.7])
def test_log_dividend_branches_meet_at_kappa(a):
    log_g0, ratio0 = _log_dividend_terms(a, 0.0)
    eps = 1e-3
    for side in (-1.0, 1.0):
        log_g, ratio = _log_dividend_terms(a, side * eps)
        assert log_g == pytest.approx(log_g0 + side * eps * ratio0, abs=1e-5)
        assert ratio == pytest.approx(ratio0, rel=1e-2)


def test_log_dividend_is_constant_at_short_rate():
    log_g, ratio = _log_dividend_terms(0.0, 1.5)
    assert log_g == pytest.approx(-0.5 * math.log(math.pi), abs=1e-14)
    assert ratio == 0.0


def test_log_dividend_parameters_must_be_positive():
    with pytest.raises(ModelError):
        log_dividend(0.05, 0.0, 0.2, 1.0)
    with pytest.raises(NotAvailableError):
        log_dividend(0.05, 0.1, 0.2, 1.0).m_slope(0.06)
