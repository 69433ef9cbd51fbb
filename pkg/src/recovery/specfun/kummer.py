"""Kummer's confluent hypergeometric function M(a, b, z), real arguments."""

import logging
import math

import numpy as np

from recovery.errors import SpecialFunctionError
from recovery.specfun.gamma import log_gamma

logger = logging.getLogger("specfun")

TAYLOR_LIMIT = 35.0
ASYMPTOTIC_LIMIT = 1e4
_MAX_LOG = 709.0
_MAX_TERMS = 20000


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _check_pole(b: float):
    if _is_nonpositive_integer(b):
        raise SpecialFunctionError(f"Kummer M has a pole at b={b}")


def _polynomial(a: float, b: float, z: float) -> float:
    # a is a non-positive integer: the series terminates
    total = 0.0
    comp = 0.0
    term = 1.0
    for n in range(int(-a) + 1):
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        term *= (a + n) / (b + n) * z / (n + 1)
    return total


def _taylor(a: float, b: float, z: float) -> float:
    total = 1.0
    comp = 0.0
    term = 1.0
    for n in range(_MAX_TERMS):
        term *= (a + n) / (b + n) * z / (n + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= 1e-17 * abs(total) and n > abs(a) and n > z:
            return total
    raise SpecialFunctionError(f"Kummer series did not converge for a={a}, b={b}, z={z}")


def _log_series(a: float, b: float, z: float):
    """Term-ratio summation carried in log space, for large positive z."""
    n_terms = int(z + abs(a) + abs(b) + 12.0 * math.sqrt(z) + 60)
    for _ in range(6):
        k = np.arange(n_terms, dtype=float)
        ratios = (a + k) / (b + k) * z / (k + 1.0)
        with np.errstate(divide="ignore"):
            log_ratios = np.log(np.abs(ratios))
        log_terms = np.concatenate(([0.0], np.cumsum(log_ratios)))
        signs = np.concatenate(([1.0], np.cumprod(np.sign(ratios))))
        peak = float(np.max(log_terms))
        if log_terms[-1] - peak < -40.0 and np.all(np.diff(log_terms[-10:]) < 0):
            total = math.fsum(signs * np.exp(log_terms - peak))
            if total == 0:
                raise SpecialFunctionError(
                    f"Kummer M cancels to zero in log series for a={a}, b={b}, z={z}"
                )
            return peak + math.log(abs(total)), (1 if total > 0 else -1)
        n_terms *= 2
    raise SpecialFunctionError(f"Kummer log series did not converge for a={a}, b={b}, z={z}")


def _asymptotic(a: float, b: float, z: float):
    # M ~ Gamma(b)/Gamma(a) e^z z^(a-b) sum_s (b-a)_s (1-a)_s / s! z^-s
    total = 1.0
    term = 1.0
    for s in range(200):
        term *= (b - a + s) * (1 - a + s) / ((s + 1) * z)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    log_val = log_gamma(b) - log_gamma(a) + z + (a - b) * math.log(z) + math.log(total)
    return log_val, 1


def kummer_m_log(a: float, b: float, z: float):
    """(log|M(a,b,z)|, sign of M). sign is 0 when M vanishes."""
    a, b, z = float(a), float(b), float(z)
    _check_pole(b)
    if z == 0 or a == 0:
        return 0.0, 1
    if _is_nonpositive_integer(a):
        value = _polynomial(a, b, z)
        if value == 0:
            return -math.inf, 0
        return math.log(abs(value)), (1 if value > 0 else -1)
    if z < 0:
        log_m, sign = kummer_m_log(b - a, b, -z)
        return z + log_m, sign
    if z <= TAYLOR_LIMIT:
        value = _taylor(a, b, z)
        if value == 0:
            return -math.inf, 0
        return math.log(abs(value)), (1 if value > 0 else -1)
    if (
        z > ASYMPTOTIC_LIMIT
        and a > 0
        and b > 0
        and z > 50.0 * (abs(a) + abs(b) + 1.0) ** 2
    ):
        return _asymptotic(a, b, z)
    return _log_series(a, b, z)


def kummer_m(a: float, b: float, z: float) -> float:
    a, b, z = float(a), float(b), float(z)
    _check_pole(b)
    if z == 0 or a == 0:
        return 1.0
    if _is_nonpositive_integer(a):
        return _polynomial(a, b, z)
    if 0 < z <= TAYLOR_LIMIT:
        return _taylor(a, b, z)
    log_m, sign = kummer_m_log(a, b, z)
    if log_m > _MAX_LOG:
        raise SpecialFunctionError(
            f"Kummer M overflows for a={a}, b={b}, z={z} (log value {log_m:.6g})"
        )
    return sign * math.exp(log_m)


def kummer_m_prime(a: float, b: float, z: float) -> float:
    """dM/dz = (a/b) M(a+1, b+1, z)."""
    if b == 0:
        raise SpecialFunctionError("kummer_m_prime is undefined for b=0")
    if a == 0:
        return 0.0
    return (a / b) * kummer_m(a + 1.0, b + 1.0, z)


def kummer_log_derivative(a: float, b: float, z: float) -> float:
    """M'(a,b,z)/M(a,b,z), evaluated through log magnitudes."""
    if a == 0:
        return 0.0
    log_num, sign_num = kummer_m_log(a + 1.0, b + 1.0, z)
    log_den, sign_den = kummer_m_log(a, b, z)
    if sign_den == 0:
        raise SpecialFunctionError(f"M(a,b,z) vanishes at a={a}, b={b}, z={z}")
    return (a / b) * sign_num * sign_den * math.exp(log_num - log_den)
