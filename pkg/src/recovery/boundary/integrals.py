"""Bounded-effort verdicts on improper integrals.

Integrals are evaluated outward from xi in the chart variable and sampled
at the depths n * delta (n = 1..n_max).  Everything is kept in log space.
"""

import logging
import math

import numpy as np

from recovery.boundary.models import IntegralVerdict, VerdictKind
from recovery.config import DepthSchedule
from recovery.utils import log_cumulative_trapezoid

logger = logging.getLogger("boundary")

LOG_DIVERGENCE_CAP = math.log(1e12)
LOG_HALF = math.log(0.5)
CONVERGENCE_RUN = 4
LOG_STALL = math.log(1e-8)
INCREASING_RUN = 6
# slack on "non-decreasing" for corrections that fade exponentially with depth
LOG_FLAT = 1e-3


def depth_offsets(step: float, schedule: DepthSchedule) -> np.ndarray:
    """Node offsets from xi of each truncation depth."""
    n = np.arange(1, schedule.n_max + 1)
    return np.rint(n * schedule.delta / step).astype(int)


def log_partials(log_integrand, step: float, schedule: DepthSchedule) -> np.ndarray:
    """log of the partial integrals at each depth.

    ``log_integrand`` is sampled on the nodes ordered outward from xi.
    """
    offsets = depth_offsets(step, schedule)
    if offsets[-1] >= len(log_integrand):
        raise ValueError("depth schedule reaches beyond the sampled integrand")
    return log_cumulative_trapezoid(log_integrand, step)[offsets]


def _log_increments(log_partial: np.ndarray) -> np.ndarray:
    prev = np.concatenate([[-np.inf], log_partial[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        inc = log_partial + np.log1p(-np.exp(prev - log_partial))
    inc[~(log_partial > prev)] = -np.inf
    return inc


def verdict(log_partial) -> IntegralVerdict:
    """Decide convergence from the log partial integrals at deepening depths."""
    log_partial = np.asarray(log_partial, dtype=float)
    trace = [float(v) for v in log_partial]
    last = log_partial[-1]

    if last == -np.inf:
        return IntegralVerdict(
            kind=VerdictKind.CONVERGENT, value=0.0, log_trace=trace, rule="zero"
        )
    if last > LOG_DIVERGENCE_CAP:
        return IntegralVerdict(kind=VerdictKind.DIVERGENT, log_trace=trace, rule="cap")

    inc = _log_increments(log_partial)
    ratios = inc[1:] - inc[:-1]
    tail = ratios[-CONVERGENCE_RUN:]
    finite_tail = tail[np.isfinite(tail)]
    vanished = inc[-CONVERGENCE_RUN:] == -np.inf
    geometric = len(tail) == CONVERGENCE_RUN and bool(np.all((tail <= LOG_HALF) | vanished))
    stalled = inc[-1] - last < LOG_STALL
    if geometric or stalled:
        rho = math.exp(float(np.max(finite_tail))) if finite_tail.size else 0.0
        value = math.exp(last)
        if rho < 1 and inc[-1] > -np.inf:
            value += math.exp(inc[-1]) * rho / (1.0 - rho)
        rule = "geometric" if geometric else "stalled"
        return IntegralVerdict(
            kind=VerdictKind.CONVERGENT, value=value, log_trace=trace, rule=rule
        )

    recent = inc[-INCREASING_RUN:]
    if len(recent) == INCREASING_RUN and np.all(np.isfinite(recent)):
        if bool(np.all(np.diff(recent) >= -LOG_FLAT)):
            return IntegralVerdict(
                kind=VerdictKind.DIVERGENT, log_trace=trace, rule="increments"
            )

    logger.debug(f"Indeterminate integral verdict, log partials {trace}")
    return IntegralVerdict(kind=VerdictKind.INDETERMINATE, log_trace=trace, rule="none")
