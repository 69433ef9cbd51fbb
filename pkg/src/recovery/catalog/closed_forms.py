"""Closed-form reference markets.

* black_scholes: geometric Brownian motion with a constant dividend yield
* exp_cir: S = e^Y with Y a CIR-type process on (0, inf)
* log_dividend: dividends paid at rate b ln S per unit
"""

import logging
import math

import numpy as np
from scipy.special import hyperu

from recovery.catalog.models import ClosedFormModel, ExpectedSet
from recovery.errors import ModelError, NotAvailableError
from recovery.model.models import Domain, MarketModel
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.residual import residual
from recovery.specfun.gamma import log_gamma
from recovery.specfun.kummer import kummer_log_derivative, kummer_m_log

logger = logging.getLogger("catalog")

RESIDUAL_LIMIT = 1e-6
CHECK_HALFWIDTH = 5.0
CHECK_STEP = 0.01
LOG_SQRT_PI = 0.5 * math.log(math.pi)

_kummer_log = np.vectorize(kummer_m_log, otypes=[float, float])
_kummer_dlog = np.vectorize(kummer_log_derivative, otypes=[float])


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ModelError(f"{name} must be strictly positive, got {value}")


def _check_residual(model: MarketModel, lam, log_h, dlog_h, m_slope) -> float:
    """Residual of the closed form on a grid around xi."""
    chart = model.chart
    u = chart.to_u(model.xi) + np.arange(-CHECK_HALFWIDTH, CHECK_HALFWIDTH + 1e-9, CHECK_STEP)
    x = np.asarray(chart.to_x(u), dtype=float)
    solution = EigenSolution.from_log(lam, m_slope(lam), u, x, log_h(lam, x), dlog_h(lam, x))
    value = residual(model, solution)
    if value > RESIDUAL_LIMIT:
        logger.warning(f"Closed form of {model.name} has residual {value:.3g} at lambda={lam}")
    return value


def black_scholes(r: float, delta: float, sigma: float, xi: float = 1.0) -> ClosedFormModel:
    """Geometric Brownian motion with dividend yield delta; h(s) = (s/xi)^M."""
    _require_positive(sigma=sigma, xi=xi)
    drift = r - delta
    c = 0.5 - drift / (sigma * sigma)
    lambda_bar = r + 0.5 * (sigma / 2.0 - drift / sigma) ** 2

    def exponent(lam):
        disc = c * c + 2.0 * (r - lam) / (sigma * sigma)
        if disc < -1e-12 * (1.0 + c * c):
            raise NotAvailableError(f"no positive solution above lambda_bar={lambda_bar}")
        return c + math.sqrt(max(disc, 0.0))

    def m_slope(lam):
        return exponent(lam) / xi

    def log_h(lam, s):
        return exponent(lam) * np.log(np.asarray(s, dtype=float) / xi)

    def dlog_h(lam, s):
        return exponent(lam) / np.asarray(s, dtype=float)

    model = MarketModel(
        b=lambda s: (drift + sigma * sigma) * s,
        sigma=lambda s: sigma * s,
        r=lambda s: r + 0.0 * s,
        v=lambda s: sigma + 0.0 * s,
        xi=xi,
        name="black_scholes",
    )
    log_model = MarketModel(
        b=lambda y: drift + 0.5 * sigma * sigma + 0.0 * y,
        sigma=lambda y: sigma + 0.0 * y,
        r=lambda y: r + 0.0 * y,
        v=lambda y: sigma + 0.0 * y,
        xi=math.log(xi),
        domain=Domain(lo=-math.inf),
        name="black_scholes_log",
    )
    if 2.0 * drift >= sigma * sigma:
        expected = ExpectedSet(hi=r, hi_included=False)
    else:
        expected = ExpectedSet(hi=lambda_bar, hi_included=True)
    check_lambda = min(r, lambda_bar) - 0.01
    return ClosedFormModel(
        family="black_scholes",
        params={"r": r, "delta": delta, "sigma": sigma, "xi": xi},
        model=model,
        log_model=log_model,
        lambda_bar=lambda_bar,
        m_slope=m_slope,
        log_h=log_h,
        dlog_h=dlog_h,
        admissible_set_expected=expected,
        check_lambda=check_lambda,
        check_residual=_check_residual(model, check_lambda, log_h, dlog_h, m_slope),
    )


def exp_cir(r: float, delta: float, sigma: float, xi: float = 2.0) -> ClosedFormModel:
    """S = e^Y with dY = (theta + sigma^2 Y / 2) dt + sigma sqrt(Y) dB, theta = r - delta.

    h(s) = M(a, b, ln s) / M(a, b, ln xi) with a = 2(r - lambda)/sigma^2 and
    b = 2 theta / sigma^2; only lambda <= r is covered.
    """
    _require_positive(sigma=sigma)
    theta = r - delta
    if not 2.0 * theta >= sigma * sigma:
        raise ModelError(f"exp_cir needs 2(r - delta) >= sigma^2, got theta={theta}")
    if not xi > 1:
        raise ModelError(f"exp_cir needs xi > 1, got {xi}")
    kb = 2.0 * theta / (sigma * sigma)
    y_xi = math.log(xi)

    def ka(lam):
        if lam > r:
            raise NotAvailableError(f"exp_cir closed form covers lambda <= r={r} only")
        return 2.0 * (r - lam) / (sigma * sigma)

    def log_g(lam, y):
        log_m, _ = _kummer_log(ka(lam), kb, y)
        return log_m

    def log_h(lam, s):
        return log_g(lam, np.log(np.asarray(s, dtype=float))) - log_g(lam, y_xi)

    def dlog_h(lam, s):
        s = np.asarray(s, dtype=float)
        return _kummer_dlog(ka(lam), kb, np.log(s)) / s

    def m_slope(lam):
        return float(dlog_h(lam, xi))

    def price_slope(lam):
        a = ka(lam)
        if a == 0:
            return 0.0
        log_ratio = kummer_m_log(a + 1.0, kb + 1.0, y_xi)[0] - kummer_m_log(a, kb, y_xi)[0]
        return (r - lam) / (theta * xi) * math.exp(log_ratio)

    model = MarketModel(
        b=lambda s: (theta + sigma * sigma * np.log(s)) * s,
        sigma=lambda s: sigma * s * np.sqrt(np.log(s)),
        r=lambda s: r + 0.0 * s,
        v=lambda s: sigma * np.sqrt(np.log(s)),
        xi=xi,
        domain=Domain(lo=1.0),
        name="exp_cir",
    )
    log_model = MarketModel(
        b=lambda y: theta + 0.5 * sigma * sigma * y,
        sigma=lambda y: sigma * np.sqrt(y),
        r=lambda y: r + 0.0 * y,
        v=lambda y: sigma * np.sqrt(y),
        xi=y_xi,
        domain=Domain(lo=0.0),
        name="exp_cir_log",
    )
    check_lambda = r - 0.01
    return ClosedFormModel(
        family="exp_cir",
        params={"r": r, "delta": delta, "sigma": sigma, "xi": xi},
        model=model,
        log_model=log_model,
        lambda_bar=r,
        m_slope=m_slope,
        log_h=log_h,
        dlog_h=dlog_h,
        admissible_set_expected=ExpectedSet(
            empty=True, reason="usual set empty: entrance left boundary"
        ),
        check_lambda=check_lambda,
        check_residual=_check_residual(model, check_lambda, log_h, dlog_h, m_slope),
        price_slope=price_slope,
    )


def _log_dividend_terms(a: float, s: float):
    """(log g, g'/g in s) of the increasing solution, up to a constant.

    g = M(a, 1/2, s^2)/Gamma(a + 1/2) + 2 s M(a + 1/2, 3/2, s^2)/Gamma(a),
    which equals U(a, 1/2, s^2)/sqrt(pi) for s < 0. Needs a >= 0.
    """
    z = s * s
    if s < 0:
        value = hyperu(a, 0.5, z)
        slope = -2.0 * a * s * hyperu(a + 1.0, 1.5, z) if a > 0 else 0.0
        return math.log(value) - LOG_SQRT_PI, slope / value
    values = [kummer_m_log(a, 0.5, z)[0] - log_gamma(a + 0.5)]
    slopes = []
    if a > 0:
        rg = log_gamma(a)
        if s > 0:
            values.append(kummer_m_log(a + 0.5, 1.5, z)[0] + math.log(2.0 * s) - rg)
            # d/ds M(a, 1/2, s^2) = 4 a s M(a + 1, 3/2, s^2)
            slopes.append(
                kummer_m_log(a + 1.0, 1.5, z)[0] + math.log(4.0 * a * s) - log_gamma(a + 0.5)
            )
            slopes.append(
                kummer_m_log(a + 1.5, 2.5, z)[0]
                + math.log((8.0 / 3.0) * (a + 0.5) * z)
                - rg
            )
        slopes.append(kummer_m_log(a + 0.5, 1.5, z)[0] + math.log(2.0) - rg)
    log_total = float(np.logaddexp.reduce(values))
    ratio = math.fsum(math.exp(v - log_total) for v in slopes)
    return log_total, ratio


def log_dividend(r: float, b: float, sigma: float, xi: float = 1.0) -> ClosedFormModel:
    """Index paying dividends at rate b ln S, dS/S = (r - b ln S + sigma^2) dt + sigma dB."""
    _require_positive(b=b, sigma=sigma, xi=xi)
    kappa = r / b - sigma * sigma / (2.0 * b)
    scale = math.sqrt(b) / sigma
    y_xi = math.log(xi)

    def ka(lam):
        if lam > r:
            raise NotAvailableError(f"log_dividend closed form covers lambda <= r={r} only")
        return (r - lam) / (2.0 * b)

    def terms(lam, y):
        a = ka(lam)
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.array([_log_dividend_terms(a, scale * (v - kappa)) for v in ys.flat])
        return out[:, 0].reshape(ys.shape), out[:, 1].reshape(ys.shape) * scale

    def log_h(lam, s):
        log_g, _ = terms(lam, np.log(np.asarray(s, dtype=float)))
        log_g_xi, _ = terms(lam, y_xi)
        values = log_g - log_g_xi[0]
        return values if np.ndim(s) else float(values[0])

    def dlog_h(lam, s):
        s = np.asarray(s, dtype=float)
        _, slope = terms(lam, np.log(s))
        values = slope / np.atleast_1d(s)
        return values if np.ndim(s) else float(values[0])

    def m_slope(lam):
        return float(dlog_h(lam, xi))

    model = MarketModel(
        b=lambda s: (r + sigma * sigma - b * np.log(s)) * s,
        sigma=lambda s: sigma * s,
        r=lambda s: r + 0.0 * s,
        v=lambda s: sigma + 0.0 * s,
        xi=xi,
        name="log_dividend",
    )
    log_model = MarketModel(
        b=lambda y: r - b * y + 0.5 * sigma * sigma,
        sigma=lambda y: sigma + 0.0 * y,
        r=lambda y: r + 0.0 * y,
        v=lambda y: sigma + 0.0 * y,
        xi=y_xi,
        domain=Domain(lo=-math.inf),
        name="log_dividend_log",
    )
    check_lambda = r - 0.02
    return ClosedFormModel(
        family="log_dividend",
        params={"r": r, "b": b, "sigma": sigma, "xi": xi, "kappa": kappa},
        model=model,
        log_model=log_model,
        lambda_bar=r,
        m_slope=m_slope,
        log_h=log_h,
        dlog_h=dlog_h,
        admissible_set_expected=ExpectedSet(hi=r, hi_included=False),
        check_lambda=check_lambda,
        check_residual=_check_residual(model, check_lambda, log_h, dlog_h, m_slope),
    )


CATALOG = {
    "black_scholes": black_scholes,
    "exp_cir": exp_cir,
    "log_dividend": log_dividend,
}
