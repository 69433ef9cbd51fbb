import math

from recovery.errors import SpecialFunctionError

_LANCZOS_G = 7
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0 (Lanczos, reflection below 1/2)."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise SpecialFunctionError(f"log_gamma needs a positive finite argument, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS_COEFFICIENTS[0]
    for i in range(1, len(_LANCZOS_COEFFICIENTS)):
        acc += _LANCZOS_COEFFICIENTS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def reciprocal_gamma_log(x: float):
    """(log|1/Gamma(x)|, sign) for x >= 0; 1/Gamma(0) is exactly zero."""
    if x == 0:
        return -math.inf, 0
    return -log_gamma(x), 1
