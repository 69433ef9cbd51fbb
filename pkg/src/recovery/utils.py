import numpy as np


def parse_int_or_fallback(int_str, fallback=0):
    value = fallback
    try:
        value = int(int_str)
    except (TypeError, ValueError):
        pass
    return value


def log_cumulative_trapezoid(log_f, step):
    """log of the running trapezoid integral of exp(log_f), starting at 0.

    The first entry is -inf (empty integral).
    """
    log_f = np.asarray(log_f, dtype=float)
    out = np.full(log_f.shape, -np.inf)
    if log_f.size < 2:
        return out
    panels = np.log(0.5 * step) + np.logaddexp(log_f[:-1], log_f[1:])
    out[1:] = np.logaddexp.accumulate(panels)
    return out


def format_float(value):
    return format(float(value), ".17g")
