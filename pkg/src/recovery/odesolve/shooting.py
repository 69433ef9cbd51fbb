"""Shooting for positive solutions of 1/2 sigma^2 h'' + k h' - r h = -lambda h.

The equation is integrated in the chart variable u as the first-order system
(H, H_u) with DOP853.  Whenever the state grows past ``RESCALE_LIMIT`` the
integration restarts from the rescaled state and the log of the factor is
carried alongside the samples.
"""

import logging
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.errors import (
    BracketError,
    HypothesisError,
    IntegrationError,
    NotAdmissibleError,
)
from recovery.model.coefficients import working_grid
from recovery.model.models import MarketModel
from recovery.odesolve.models import (
    CandidateSlice,
    CriticalLambda,
    EigenSolution,
    Side,
    ZeroCrossing,
)

logger = logging.getLogger("odesolve")

RESCALE_LIMIT = 1e100
ABS_TOL = 1e-30
MAX_SEGMENTS = 10_000
SLOPE_BRACKET = 1e6
BRACKET_WIDENINGS = 3
SENSITIVITY_REL = 1e-4
DOUBLE_ROOT_SLACK = 1e-12


def _system(model: MarketModel, lam: float):
    chart = model.chart
    curvature = chart.curvature

    def rhs(u, state):
        x = chart.to_x(u)
        xu = float(chart.x_u(u))
        sigma = model.sigma(x)
        s2 = sigma * sigma
        a = 2.0 * xu * xu * (model.r(x) - lam) / s2
        c = curvature - 2.0 * model.k(x) * xu / s2
        out = np.empty_like(state)
        out[0::2] = state[1::2]
        out[1::2] = a * state[0::2] + c * state[1::2]
        return out

    return rhs


def local_roots(model: MarketModel, lam: float, u: float):
    """Exponents (mu_plus, mu_minus) of the frozen-coefficient equation at u.

    Returns None when they are complex.
    """
    chart = model.chart
    x = chart.to_x(u)
    xu = float(chart.x_u(u))
    sigma = float(model.sigma(x))
    a = 0.5 * sigma * sigma / (xu * xu)
    b = float(model.k(x)) / xu - 0.5 * sigma * sigma * chart.curvature / (xu * xu)
    c = -(float(model.r(x)) - lam)
    disc = b * b - 4.0 * a * c
    if disc < 0:
        # a double root can round to a slightly negative discriminant
        if disc < -DOUBLE_ROOT_SLACK * (b * b + abs(4.0 * a * c)):
            return None
        disc = 0.0
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0:
        return 0.0, 0.0
    first, second = q / a, c / q
    return max(first, second), min(first, second)


def _integrate(model, lam, y0, u_start, u_end, sample_u, numerics, stop_on_zero=False):
    """Integrate from u_start toward u_end, sampling at sample_u.

    sample_u must be ordered along the direction of integration.  Returns
    (states, log_scales, u_zero); on a zero crossing of H only the samples
    before it are returned.
    """
    chart = model.chart
    rhs = _system(model, lam)
    direction = 1.0 if u_end > u_start else -1.0
    sample_u = np.asarray(sample_u, dtype=float)
    n = sample_u.size
    y = np.array(y0, dtype=float)
    states = np.empty((n, y.size))
    logs = np.empty(n)
    log_scale = 0.0
    u0 = float(u_start)

    idx = 0
    while idx < n and (sample_u[idx] - u0) * direction <= 0:
        states[idx] = y
        logs[idx] = 0.0
        idx += 1

    def overflow(u, state):
        return np.max(np.abs(state)) - RESCALE_LIMIT

    overflow.terminal = True

    def zero(u, state):
        return state[0]

    zero.terminal = True
    events = [overflow, zero] if stop_on_zero else [overflow]

    for _ in range(MAX_SEGMENTS):
        sol = solve_ivp(
            rhs,
            (u0, float(u_end)),
            y,
            method="DOP853",
            rtol=numerics.ode_rel_tol,
            atol=ABS_TOL,
            dense_output=True,
            events=events,
        )
        if sol.status == -1:
            where = float(chart.to_x(sol.t[-1]))
            raise IntegrationError(f"integration failed near x={where:.6g}: {sol.message}")
        t_stop = float(sol.t[-1])
        j = idx
        while j < n and (sample_u[j] - t_stop) * direction <= 0:
            j += 1
        if j > idx:
            states[idx:j] = sol.sol(sample_u[idx:j]).T
            logs[idx:j] = log_scale
            idx = j
        if stop_on_zero and sol.t_events[1].size:
            return states[:idx], logs[:idx], float(sol.t_events[1][0])
        if sol.status == 0:
            return states, logs, None
        y = sol.y[:, -1]
        scale = float(np.max(np.abs(y)))
        y = y / scale
        log_scale += math.log(scale)
        u0 = t_stop
    raise IntegrationError(f"too many rescaling segments at lambda={lam}")


def integrate(
    model: MarketModel,
    lam: float,
    slope: float,
    direction: Side,
    numerics: Numerics = DEFAULT_NUMERICS,
):
    """Shoot from xi with h(xi) = 1, h'(xi) = slope toward one boundary."""
    grid = working_grid(model, numerics)
    c = grid.center
    y0 = [1.0, slope * grid.x_u[c]]
    if direction == "left":
        sample_u, u_end = grid.u[c::-1], grid.u_min
    else:
        sample_u, u_end = grid.u[c:], grid.u_max
    states, logs, u_zero = _integrate(
        model, lam, y0, grid.u_xi, u_end, sample_u, numerics, stop_on_zero=True
    )
    if u_zero is not None:
        x0 = float(model.chart.to_x(u_zero))
        logger.info(f"Solution at lambda={lam}, slope={slope} vanishes at x={x0:.6g}")
        return ZeroCrossing(lam=lam, slope=slope, x0=x0, u0=u_zero, side=direction)

    u = sample_u
    order = slice(None, None, -1) if direction == "left" else slice(None)
    xu = np.asarray(model.chart.x_u(u), dtype=float)
    return EigenSolution(
        lam=lam,
        slope=slope,
        u=u[order],
        x=np.asarray(model.chart.to_x(u), dtype=float)[order],
        h=states[:, 0][order],
        dh=(states[:, 1] / xu)[order],
        rescale_log=logs[order],
        truncation=(float(grid.x[0]), float(grid.x[-1])),
    )


@lru_cache(maxsize=256)
def _fundamental_pair(model: MarketModel, lam: float, side: str, numerics: Numerics):
    """Solutions through xi with (h, h') = (1, 0) and (0, 1), sampled outward."""
    grid = working_grid(model, numerics)
    c = grid.center
    y0 = [1.0, 0.0, 0.0, grid.x_u[c]]
    if side == "left":
        sample_u, u_end = grid.u[c - 1 :: -1], grid.u_min
    else:
        sample_u, u_end = grid.u[c + 1 :], grid.u_max
    states, _, _ = _integrate(model, lam, y0, grid.u_xi, u_end, sample_u, numerics)
    return sample_u, states


def _predicate(model, lam, sample_u, states, depth, side):
    """Positivity on the first ``depth`` samples plus the tail-slope test."""
    roots = local_roots(model, lam, float(sample_u[depth - 1]))
    h0, q0 = states[:depth, 0], states[:depth, 1]
    h1, q1 = states[:depth, 2], states[:depth, 3]

    def holds(z):
        if roots is None:
            return False
        h = h0 + z * h1
        if not np.all(h > 0):
            return False
        tail = (q0[-1] + z * q1[-1]) / h[-1]
        if side == "left":
            return tail <= roots[0]
        return tail >= roots[1]

    return holds


def _supremum(pred, tol: float) -> float:
    """sup{z : pred(z)} for a predicate that holds on a down-set."""
    bound = SLOPE_BRACKET
    for _ in range(BRACKET_WIDENINGS + 1):
        lo_ok, hi_ok = pred(-bound), pred(bound)
        if not lo_ok and not hi_ok:
            bound *= 10
            continue
        if lo_ok and not hi_ok:
            break
        if hi_ok:
            bound *= 10
            continue
    else:
        if pred(bound):
            return math.inf
        return -math.inf
    lo, hi = -bound, bound
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _extremal_slope(model, lam, side, numerics, depth=None):
    sample_u, states = _fundamental_pair(model, lam, side, numerics)
    depth = depth or sample_u.size
    pred = _predicate(model, lam, sample_u, states, depth, side)
    tol = numerics.bisect_tol_slope
    if side == "left":
        return _supremum(pred, tol)
    return -_supremum(lambda z: pred(-z), tol)


def _sensitivity(full: float, half: float) -> float:
    if full == half:
        return 0.0
    if math.isinf(full) or math.isinf(half):
        return math.inf
    return abs(full - half)


def slope_bounds(
    model: MarketModel, lam: float, numerics: Numerics = DEFAULT_NUMERICS
) -> CandidateSlice:
    """Extremal initial slopes m and M of positive solutions at lambda."""
    lam = float(lam)
    upper = _extremal_slope(model, lam, "left", numerics)
    lower = _extremal_slope(model, lam, "right", numerics)

    n_left = _fundamental_pair(model, lam, "left", numerics)[0].size
    n_right = _fundamental_pair(model, lam, "right", numerics)[0].size
    upper_half = _extremal_slope(model, lam, "left", numerics, depth=n_left // 2)
    lower_half = _extremal_slope(model, lam, "right", numerics, depth=n_right // 2)
    sensitivity = max(_sensitivity(upper, upper_half), _sensitivity(lower, lower_half))

    nonempty = lower <= upper + 2 * numerics.bisect_tol_slope
    scale = 1.0 + abs(upper) if math.isfinite(upper) else 1.0
    indeterminate = nonempty and sensitivity > SENSITIVITY_REL * scale
    if indeterminate:
        logger.warning(
            f"Slope bounds at lambda={lam} depend on the truncation depth "
            f"(sensitivity {sensitivity:.3g})"
        )
    return CandidateSlice(
        lam=lam,
        m_lambda=lower,
        M_lambda=upper,
        nonempty=nonempty,
        truncation_sensitivity=sensitivity,
        indeterminate=indeterminate,
    )


def extremal_solution(
    model: MarketModel, lam: float, numerics: Numerics = DEFAULT_NUMERICS
) -> EigenSolution:
    """The M-slope solution on the whole working grid, normalised at xi.

    It is started at the left truncation on the recessive local exponent and
    integrated toward xi, then continued to the right with the slope it
    arrives with.
    """
    lam = float(lam)
    grid = working_grid(model, numerics)
    c = grid.center
    roots = local_roots(model, lam, grid.u_min)
    if roots is None:
        raise NotAdmissibleError(f"no positive solution at lambda={lam}")

    left_u = grid.u[: c + 1]
    left, left_logs, zero = _integrate(
        model, lam, [1.0, roots[0]], grid.u_min, grid.u_xi, left_u, numerics, stop_on_zero=True
    )
    if zero is not None:
        raise NotAdmissibleError(
            f"no positive solution at lambda={lam}: zero at x={float(model.chart.to_x(zero)):.6g}"
        )
    h_xi = left[-1, 0]
    slope = float(left[-1, 1] / h_xi / grid.x_u[c])
    log_norm = left_logs[-1] + math.log(h_xi)

    right_u = grid.u[c:]
    right, right_logs, zero = _integrate(
        model, lam, [1.0, slope * grid.x_u[c]], grid.u_xi, grid.u_max, right_u, numerics,
        stop_on_zero=True,
    )
    if zero is not None:
        raise NotAdmissibleError(
            f"no positive solution at lambda={lam}: zero at x={float(model.chart.to_x(zero)):.6g}"
        )

    h = np.concatenate([left[:-1, 0], right[:, 0]])
    q = np.concatenate([left[:-1, 1], right[:, 1]])
    logs = np.concatenate([left_logs[:-1] - log_norm, right_logs])
    return EigenSolution(
        lam=lam,
        slope=slope,
        u=grid.u,
        x=grid.x,
        h=h,
        dh=q / grid.x_u,
        rescale_log=logs,
        truncation=(float(grid.x[0]), float(grid.x[-1])),
    )


def critical_lambda(
    model: MarketModel, numerics: Numerics = DEFAULT_NUMERICS
) -> CriticalLambda:
    """Largest lambda with a positive solution, by bisection on nonemptiness."""
    grid = working_grid(model, numerics)
    r_nodes = np.broadcast_to(model.r(grid.x), grid.x.shape)
    if np.any(r_nodes < 0):
        where = float(grid.x[int(np.argmax(r_nodes < 0))])
        raise HypothesisError(f"r must be nonnegative, r<0 at x={where:.6g}")
    r_bar = float(np.min(r_nodes))

    def nonempty(lam):
        return slope_bounds(model, lam, numerics).nonempty

    lo = r_bar
    if not nonempty(lo):
        logger.warning(f"No positive solution found at r_bar={r_bar}; reporting lambda_bar=r_bar")
        width = slope_bounds(model, lo, numerics).width
        return CriticalLambda(
            lambda_bar=lo, r_bar=r_bar, bracket=(lo, lo), iterations=0, expansions=0,
            slice_width=width,
        )

    growth = numerics.bracket_growth
    hi = r_bar + growth
    expansions = 0
    while nonempty(hi):
        expansions += 1
        if expansions > numerics.max_bracket_expansions:
            raise BracketError(f"no empty slice found up to lambda={hi}")
        lo = hi
        growth *= 2
        hi = r_bar + growth

    bracket = (lo, hi)
    iterations = 0
    while hi - lo > numerics.bisect_tol_lambda:
        mid = 0.5 * (lo + hi)
        if nonempty(mid):
            lo = mid
        else:
            hi = mid
        iterations += 1

    width = slope_bounds(model, lo, numerics).width
    logger.info(
        f"Critical lambda for {model.name}: {lo:.8g} (r_bar={r_bar}, "
        f"{expansions} expansions, {iterations} bisections)"
    )
    return CriticalLambda(
        lambda_bar=lo,
        r_bar=r_bar,
        bracket=bracket,
        iterations=iterations,
        expansions=expansions,
        slice_width=width,
    )
