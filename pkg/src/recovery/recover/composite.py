import logging

import numpy as np

from recovery.errors import ModelError
from recovery.exprdsl.evaluator import compile_expr
from recovery.model.coefficients import working_grid
from recovery.model.models import Domain, MarketModel

logger = logging.getLogger("recover")

MONOTONE_SLACK = 1e-12


def _as_function(f):
    if callable(f) and not isinstance(f, str):
        return f
    return compile_expr(f)


def composite_index_model(delta_fn, r_fn, sigma_fn, xi: float) -> MarketModel:
    """Market of an index S paying dividends at rate delta(S) per unit.

    The state is S with b(s) = (r - delta + sigma^2) s, volatility sigma(s) s
    and numeraire volatility v(s) = sigma(s), so that k(s) = (r - delta) s.
    """
    delta = _as_function(delta_fn)
    rate = _as_function(r_fn)
    vol = _as_function(sigma_fn)

    def b(s):
        sig = vol(s)
        return (rate(s) - delta(s) + sig * sig) * s

    def sigma(s):
        return vol(s) * s

    def r(s):
        return rate(s) * np.ones_like(np.asarray(s, dtype=float))

    def v(s):
        return vol(s) * np.ones_like(np.asarray(s, dtype=float))

    model = MarketModel(b=b, sigma=sigma, r=r, v=v, xi=xi, domain=Domain(), name="composite_index")

    s = working_grid(model).x
    d = np.broadcast_to(delta(s), s.shape)
    falling = np.diff(d) < -MONOTONE_SLACK * (1.0 + np.abs(d[1:]))
    if np.any(falling):
        where = float(s[1:][int(np.argmax(falling))])
        raise ModelError(f"dividend rate must be nondecreasing, decreases near s={where:.6g}")
    rising = np.diff(d * s) > 0
    if not np.all(rising):
        where = float(s[1:][int(np.argmax(~rising))])
        raise ModelError(f"dividend per unit delta(s) s must increase, fails near s={where:.6g}")
    logger.info(f"Built composite index model at xi={xi}")
    return model
