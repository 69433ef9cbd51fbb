import math

import numpy as np
import pytest

from recovery.errors import SpecialFunctionError
from recovery.specfun.gamma import log_gamma, reciprocal_gamma_log
from recovery.specfun.kummer import (
    kummer_log_derivative,
    kummer_m,
    kummer_m_log,
    kummer_m_prime,
)


def test_kummer_at_zero_argument_and_zero_a():
    assert kummer_m(0.7, 1.3, 0.0) == 1.0
    assert kummer_m(0.0, 2.5, 17.0) == 1.0
    assert kummer_m(0.0, 2.5, -4.0) == 1.0


def test_kummer_one_two_is_expm1_over_z():
    assert kummer_m(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-14)
    for z in (0.5, 5.0, 20.0):
        assert kummer_m(1.0, 2.0, z) == pytest.approx(math.expm1(z) / z, rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_equal_parameters_give_exponential(a):
    for z in np.linspace(0.0, 30.0, 31):
        assert kummer_m(a, a, z) == pytest.approx(math.exp(z), rel=1e-10)


def test_large_argument_in_log_space():
    # M(a, a, z) = e^z far beyond the Taylor range
    for z in (40.0, 120.0, 800.0):
        log_m, sign = kummer_m_log(1.5, 1.5, z)
        assert sign == 1
        assert log_m == pytest.approx(z, rel=1e-10)


def test_negative_argument_uses_kummer_transform():
    # M(1, 2, z) = (e^z - 1)/z holds for negative z too
    z = -25.0
    assert kummer_m(1.0, 2.0, z) == pytest.approx(math.expm1(z) / z, rel=1e-10)


def test_overflow_is_reported():
    with pytest.raises(SpecialFunctionError):
        kummer_m(1.0, 1.0, 800.0)


@pytest.mark.parametrize("b", [0.0, -1.0, -3.0])
def test_pole_parameters(b):
    with pytest.raises(SpecialFunctionError):
        kummer_m(0.5, b, 1.0)


def test_derivative_trivial_cases():
    assert kummer_m_prime(0.0, 2.0, 3.0) == 0.0
    assert kummer_m_prime(1.0, 2.0, 0.0) == 0.5


def _central_difference(a, b, z, h=1e-6):
    return (kummer_m(a, b, z + h) - kummer_m(a, b, z - h)) / (2.0 * h)


def test_derivative_matches_finite_difference():
    assert kummer_m_prime(-1.0, 0.5, 0.3) == pytest.approx(
        _central_difference(-1.0, 0.5, 0.3), abs=1e-8
    )


def test_derivative_identity_on_parameter_grid():
    rng = np.random.default_rng(11)
    for _ in range(40):
        a = float(rng.uniform(-2.0, 2.0))
        b = float(rng.uniform(0.3, 3.0))
        z = float(rng.uniform(-3.0, 3.0))
        fd = _central_difference(a, b, z)
        assert kummer_m_prime(a, b, z) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_log_derivative_agrees_with_ratio():
    a, b, z = 0.8, 1.7, 4.0
    assert kummer_log_derivative(a, b, z) == pytest.approx(
        kummer_m_prime(a, b, z) / kummer_m(a, b, z), rel=1e-12
    )
    assert kummer_log_derivative(0.0, b, z) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_non_positive_integer_a_is_a_polynomial(n):
    a, b, z = -float(n), 1.5, 2.3
    expected = 0.0
    term = 1.0
    for k in range(n + 1):
        expected += term
        term *= (a + k) / (b + k) * z / (k + 1)
    assert kummer_m(a, b, z) == pytest.approx(expected, rel=1e-13)


def test_positive_for_nonnegative_a():
    for a in (0.0, 0.25, 3.0):
        for z in (0.5, 10.0, 50.0):
            log_m, sign = kummer_m_log(a, 1.2, z)
            assert sign == 1
            assert math.isfinite(log_m)


def test_sign_is_reported_for_negative_a():
    # one positive zero for -1 < a < 0; M is negative beyond it
    _, sign = kummer_m_log(-0.5, 1.2, 30.0)
    assert sign == -1
    assert kummer_m(-0.5, 1.2, 0.1) > 0


def test_log_gamma_known_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-13)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-13)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-12)
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-12)


@pytest.mark.parametrize("x", [0.1, 0.37, 1.5, 7.25, 42.0, 170.5])
def test_log_gamma_matches_math_lgamma(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf])
def test_log_gamma_rejects_bad_arguments(x):
    with pytest.raises(SpecialFunctionError):
        log_gamma(x)


def test_reciprocal_gamma_at_zero():
    assert reciprocal_gamma_log(0.0) == (-math.inf, 0)
    log_value, sign = reciprocal_gamma_log(3.0)
    assert sign == 1
    assert log_value == pytest.approx(-math.log(2.0), rel=1e-12)
