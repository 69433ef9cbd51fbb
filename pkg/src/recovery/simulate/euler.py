"""Euler-Maruyama in the chart variable u, with ln G carried alongside.

Paths are simulated in fixed-size blocks for the thread pool. Path ``j``
draws from Philox keyed by (seed, j), so a path does not depend on the
worker count or on how many other paths are simulated.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from recovery.config import DEFAULT_NUMERICS, Numerics, settings
from recovery.errors import SimulationError
from recovery.model.coefficients import working_grid
from recovery.model.models import MarketModel
from recovery.odesolve.models import EigenSolution
from recovery.odesolve.shooting import extremal_solution
from recovery.recover.models import RecoveredAgent
from recovery.simulate.models import (
    Estimate,
    Exceedance,
    MartingaleMCCheck,
    Measure,
    MeasureComparison,
    SimulationResult,
    TerminalSummary,
)

logger = logging.getLogger("simulate")

BLOCK_SIZE = 4096
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
PASS_SIGMAS = 3.0


class _Paths(NamedTuple):
    u: np.ndarray
    log_g: np.ndarray
    clipped: np.ndarray


def path_generator(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(path,)))
    )


def _normals(seed, start, n_steps, n, antithetic):
    """Increments of paths start .. start + n - 1, one column per path.

    With antithetic draws, paths 2p and 2p + 1 share the stream of pair p.
    """
    z = np.empty((n_steps, n))
    for j in range(n):
        path = start + j
        if antithetic:
            draws = path_generator(seed, path // 2).standard_normal(n_steps)
            z[:, j] = -draws if path % 2 else draws
        else:
            z[:, j] = path_generator(seed, path).standard_normal(n_steps)
    return z


def _run_block(model, drift, u_bounds, horizon, n_steps, seed, block, n, antithetic):
    start = block * BLOCK_SIZE
    chart = model.chart
    curvature = chart.curvature
    dt = horizon / n_steps
    sqrt_dt = math.sqrt(dt)
    z = _normals(seed, start, n_steps, n, antithetic)

    u = np.full(n, float(chart.to_u(model.xi)))
    log_g = np.zeros(n)
    clipped = np.zeros(n, dtype=bool)
    lo, hi = u_bounds
    for i in range(n_steps):
        x = chart.to_x(u)
        xu = chart.x_u(u)
        sigma = model.sigma(x)
        v = model.v(x)
        dw = sqrt_dt * z[i]
        log_g = log_g + (model.r(x) + 0.5 * v * v) * dt + v * dw
        u = u + (drift(x, u) / xu - 0.5 * sigma * sigma * curvature / (xu * xu)) * dt
        u = u + sigma / xu * dw
        if not np.all(np.isfinite(u)):
            raise SimulationError(f"non-finite state in block {block} at step {i}")
        outside = (u < lo) | (u > hi)
        if outside.any():
            clipped |= outside
            u = np.clip(u, lo, hi)
    return _Paths(u=u, log_g=log_g, clipped=clipped)


def _simulate_paths(model, drift, horizon, n_paths, n_steps, seed, antithetic, numerics):
    grid = working_grid(model, numerics)
    u_bounds = (grid.u_min, grid.u_max)
    if horizon == 0:
        u = np.full(n_paths, grid.u_xi)
        return _Paths(u=u, log_g=np.zeros(n_paths), clipped=np.zeros(n_paths, dtype=bool))
    sizes = [min(BLOCK_SIZE, n_paths - start) for start in range(0, n_paths, BLOCK_SIZE)]

    def work(block):
        return _run_block(
            model, drift, u_bounds, horizon, n_steps, seed, block, sizes[block], antithetic
        )

    with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
        blocks = list(pool.map(work, range(len(sizes))))
    paths = _Paths(
        u=np.concatenate([b.u for b in blocks]),
        log_g=np.concatenate([b.log_g for b in blocks]),
        clipped=np.concatenate([b.clipped for b in blocks]),
    )
    n_clipped = int(paths.clipped.sum())
    if n_clipped:
        logger.warning(f"{n_clipped} of {n_paths} paths left the working grid and were clipped")
    return paths


def _q_drift(model: MarketModel) -> Callable:
    def drift(x, u):
        return model.b(x)

    return drift


def _p_drift(model: MarketModel, agent: RecoveredAgent) -> Callable:
    interpolated = PchipInterpolator(agent.u, agent.drift)

    def drift(x, u):
        return interpolated(u)

    return drift


def _estimate(values) -> Estimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        return Estimate(mean=float(values.mean()), stderr=0.0)
    return Estimate(mean=float(values.mean()), stderr=float(values.std(ddof=1) / math.sqrt(n)))


def _weights(paths: _Paths, lam: float, horizon: float, u_nodes, log_h):
    """exp(lambda T) h(X_T) / G_T per path."""
    if horizon == 0:
        return np.ones(paths.u.size)
    log_weight = PchipInterpolator(u_nodes, log_h)(paths.u)
    return np.exp(lam * horizon + log_weight - paths.log_g)


def simulate(
    model: MarketModel,
    measure: Measure = Measure.Q,
    horizon: float = 1.0,
    n_paths: int = 10_000,
    n_steps: int = 1_000,
    seed: int = 0,
    agent: RecoveredAgent | None = None,
    thresholds=(),
    antithetic: bool = False,
    numerics: Numerics = DEFAULT_NUMERICS,
) -> SimulationResult:
    """Simulate X up to ``horizon`` under Q or under the agent's measure P.

    Under Q with an agent, the estimate of E[exp(beta T) phi(X_T) / G_T] is
    reported; P runs leave it out.
    """
    measure = Measure(measure)
    if n_steps < 100:
        raise SimulationError("n_steps must be at least 100")
    if n_paths < 1:
        raise SimulationError("n_paths must be at least 1")
    if not horizon >= 0:
        raise SimulationError("horizon must be nonnegative")
    if measure == Measure.P:
        if agent is None:
            raise SimulationError("simulation under P needs a recovered agent")
        drift = _p_drift(model, agent)
    else:
        drift = _q_drift(model)

    paths = _simulate_paths(model, drift, horizon, n_paths, n_steps, seed, antithetic, numerics)
    x_t = np.asarray(model.chart.to_x(paths.u), dtype=float)
    summary = TerminalSummary(
        mean=float(x_t.mean()),
        quantiles={f"{q:g}": float(np.quantile(x_t, q)) for q in QUANTILES},
    )
    estimate = None
    if measure == Measure.Q and agent is not None:
        estimate = _estimate(_weights(paths, agent.beta, horizon, agent.u, agent.log_phi))
    exceedance = [
        Exceedance(threshold=float(t), fraction=float(np.mean(x_t > t))) for t in thresholds
    ]
    logger.info(
        f"Simulated {n_paths} paths of {model.name} under {measure.value.upper()} "
        f"to T={horizon} with seed {seed}"
    )
    return SimulationResult(
        measure=measure,
        n_paths=n_paths,
        n_steps=n_steps,
        horizon=horizon,
        seed=seed,
        antithetic=antithetic,
        terminal_states=summary,
        martingale_estimate=estimate,
        exceedance=exceedance,
        clipped_paths=int(paths.clipped.sum()),
    )


def martingale_mc_check(
    model: MarketModel,
    lam: float,
    horizon: float,
    n_paths: int,
    seed: int,
    n_steps: int = 1_000,
    solution: EigenSolution | None = None,
    antithetic: bool = False,
    numerics: Numerics = DEFAULT_NUMERICS,
) -> MartingaleMCCheck:
    """Monte Carlo test of E_Q[exp(lambda T) h(X_T) / G_T] = 1 at three standard errors."""
    if n_steps < 100:
        raise SimulationError("n_steps must be at least 100")
    if solution is None:
        solution = extremal_solution(model, lam, numerics)
    paths = _simulate_paths(
        model, _q_drift(model), horizon, n_paths, n_steps, seed, antithetic, numerics
    )
    est = _estimate(_weights(paths, lam, horizon, solution.u, solution.log_h))
    passed = abs(est.mean - 1.0) <= PASS_SIGMAS * est.stderr
    logger.info(
        f"Martingale check at lambda={lam}: {est.mean:.6g} +- {est.stderr:.3g} "
        f"({'pass' if passed else 'fail'})"
    )
    return MartingaleMCCheck(lam=lam, estimate=est.mean, stderr=est.stderr, passed=passed)


def change_of_measure_mean(
    model: MarketModel,
    agent: RecoveredAgent,
    f: Callable,
    horizon: float,
    n_paths: int,
    n_steps: int = 1_000,
    seed: int = 0,
    numerics: Numerics = DEFAULT_NUMERICS,
) -> MeasureComparison:
    """E_P[f(X_T)] and E_Q[f(X_T) exp(beta T) phi(X_T) / G_T] from separate runs."""
    p_paths = _simulate_paths(
        model, _p_drift(model, agent), horizon, n_paths, n_steps, seed, False, numerics
    )
    q_paths = _simulate_paths(
        model, _q_drift(model), horizon, n_paths, n_steps, seed + 1, False, numerics
    )
    p_values = f(np.asarray(model.chart.to_x(p_paths.u), dtype=float))
    q_x = np.asarray(model.chart.to_x(q_paths.u), dtype=float)
    q_values = f(q_x) * _weights(q_paths, agent.beta, horizon, agent.u, agent.log_phi)
    return MeasureComparison(p_mean=_estimate(p_values), q_mean=_estimate(q_values))
