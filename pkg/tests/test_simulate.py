import math

import numpy as np
import pytest
from pydantic import ValidationError

from recovery.catalog.closed_forms import black_scholes
from recovery.config import DEFAULT_NUMERICS, settings
from recovery.errors import SimulationError
from recovery.recover.agent import recover_agent
from recovery.simulate.euler import (
    _q_drift,
    _simulate_paths,
    change_of_measure_mean,
    martingale_mc_check,
    path_generator,
    simulate,
)
from recovery.simulate.models import Measure, SimulationSpec


@pytest.fixture(scope="module")
def bs():
    return black_scholes(0.05, 0.02, 0.2, 1.0)


@pytest.fixture(scope="module")
def agent(bs):
    return recover_agent(bs.model, 0.0, force=True)


def test_martingale_estimate_is_one_within_three_standard_errors(bs):
    check = martingale_mc_check(bs.model, 0.0, horizon=1.0, n_paths=100_000, seed=7)
    assert check.passed
    assert abs(check.estimate - 1.0) <= 3.0 * check.stderr
    assert check.stderr > 0


def test_zero_horizon_weights_are_exactly_one(bs, agent):
    result = simulate(bs.model, Measure.Q, horizon=0.0, n_paths=100, agent=agent)
    assert result.martingale_estimate.mean == 1.0
    assert result.martingale_estimate.stderr == 0.0
    assert result.terminal_states.mean == pytest.approx(1.0, abs=1e-15)


def test_exceedance_grows_with_horizon_under_recovered_measure(bs, agent):
    fractions = []
    for horizon in (1.0, 5.0, 25.0):
        result = simulate(
            bs.model,
            Measure.P,
            horizon=horizon,
            n_paths=10_000,
            n_steps=1_000,
            seed=11,
            agent=agent,
            thresholds=[1.0],
        )
        assert result.clipped_paths == 0
        fractions.append(result.exceedance[0].fraction)
    assert fractions[0] < fractions[1] < fractions[2]


def test_same_seed_same_result(bs, agent):
    kwargs = dict(horizon=1.0, n_paths=5_000, n_steps=100, seed=3, agent=agent, thresholds=[1.2])
    first = simulate(bs.model, Measure.Q, **kwargs)
    second = simulate(bs.model, Measure.Q, **kwargs)
    assert first.model_dump() == second.model_dump()
    other = simulate(bs.model, Measure.Q, **{**kwargs, "seed": 4})
    assert other.terminal_states.mean != first.terminal_states.mean


def test_result_does_not_depend_on_worker_count(bs, monkeypatch):
    kwargs = dict(horizon=1.0, n_paths=9_000, n_steps=100, seed=5)
    serial = simulate(bs.model, Measure.Q, **kwargs)
    monkeypatch.setattr(settings, "MAX_WORKERS", 4)
    threaded = simulate(bs.model, Measure.Q, **kwargs)
    assert serial.model_dump() == threaded.model_dump()


def test_path_streams_differ():
    a = path_generator(1, 0).standard_normal(4)
    b = path_generator(1, 1).standard_normal(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, path_generator(1, 0).standard_normal(4))


def test_a_path_does_not_depend_on_the_path_count(bs):
    common = dict(horizon=1.0, n_steps=100, seed=6, antithetic=False, numerics=DEFAULT_NUMERICS)
    few = _simulate_paths(bs.model, _q_drift(bs.model), n_paths=5, **common)
    many = _simulate_paths(bs.model, _q_drift(bs.model), n_paths=4100, **common)
    assert np.array_equal(few.u, many.u[:5])
    assert np.array_equal(few.log_g, many.log_g[:5])


def test_terminal_mean_under_reference_dynamics(bs):
    # dX = (r - delta + sigma^2) X dt + sigma X dB
    result = simulate(bs.model, Measure.Q, horizon=1.0, n_paths=20_000, n_steps=100, seed=2)
    assert result.terminal_states.mean == pytest.approx(math.exp(0.07), rel=1e-2)
    quantiles = result.terminal_states.quantiles
    assert list(quantiles) == ["0.05", "0.25", "0.5", "0.75", "0.95"]
    assert quantiles["0.05"] < quantiles["0.5"] < quantiles["0.95"]


def test_antithetic_draws_run(bs):
    check = martingale_mc_check(
        bs.model, 0.0, horizon=1.0, n_paths=20_000, n_steps=100, seed=9, antithetic=True
    )
    assert check.passed


def test_reweighted_mean_matches_recovered_measure(bs, agent):
    comparison = change_of_measure_mean(
        bs.model, agent, lambda x: x, horizon=1.0, n_paths=20_000, n_steps=100, seed=1
    )
    spread = math.hypot(comparison.p_mean.stderr, comparison.q_mean.stderr)
    assert abs(comparison.p_mean.mean - comparison.q_mean.mean) <= 4.0 * spread
    assert comparison.p_mean.mean == pytest.approx(math.exp(0.03 + 0.04 * agent.slope), rel=2e-2)


def test_measure_p_needs_an_agent(bs):
    with pytest.raises(SimulationError):
        simulate(bs.model, Measure.P, n_paths=10, n_steps=100)


def test_too_few_steps_are_rejected(bs):
    with pytest.raises(SimulationError):
        simulate(bs.model, Measure.Q, n_paths=10, n_steps=50)


@pytest.mark.parametrize(
    "field, value",
    [("n_paths", 0), ("n_steps", 99), ("horizon", -1.0), ("seed", -1), ("paths", 10)],
)
def test_simulation_spec_validation(field, value):
    with pytest.raises(ValidationError):
        SimulationSpec(**{field: value})


def test_recovered_measure_run_reports_no_martingale_estimate(bs, agent):
    result = simulate(bs.model, Measure.P, horizon=1.0, n_paths=200, n_steps=100, agent=agent)
    assert result.martingale_estimate is None
    reference = simulate(bs.model, Measure.Q, horizon=1.0, n_paths=200, n_steps=100, agent=agent)
    assert reference.martingale_estimate is not None


def test_halving_the_step_gives_a_consistent_estimate(bs):
    coarse = martingale_mc_check(bs.model, 0.0, horizon=1.0, n_paths=20_000, n_steps=100, seed=12)
    fine = martingale_mc_check(bs.model, 0.0, horizon=1.0, n_paths=20_000, n_steps=200, seed=12)
    spread = math.hypot(coarse.stderr, fine.stderr)
    assert abs(coarse.estimate - fine.estimate) <= 4.0 * spread
