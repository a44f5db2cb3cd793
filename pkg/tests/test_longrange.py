import math

import pytest

from analysis.errors import DomainError
from analysis.malice import honest_race_prob, honest_wins_prob, longrange_success_prob
from analysis.params import make_params
from simulation import run_longrange_sim, run_random_walk_sim

Z = 4.0


@pytest.mark.slow
@pytest.mark.parametrize("p_h", [0.55, 0.6, 0.7])
@pytest.mark.parametrize("k", [1, 3, 6])
def test_random_walk_matches_gamblers_ruin(k, p_h):
    result = run_random_walk_sim(k, p_h, trials=20_000, seed=k)
    expected = longrange_success_prob(k, p_h)
    assert result.censored == 0
    assert result.successes + result.failures == result.trials
    assert abs(result.success_rate - expected) < Z * math.sqrt(expected * (1 - expected) / result.trials)
    assert result.ci_low <= result.success_rate <= result.ci_high


def test_attacker_ahead_on_average_always_catches_up():
    result = run_random_walk_sim(2, 0.4, trials=2_000, seed=1, max_steps=10**4)
    assert result.success_rate == 1.0
    assert result.abandoned == 0


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 3])
def test_mining_race_matches_analytic_success(k):
    params = make_params(0.3, 0.005, 0.001)
    result = run_longrange_sim(k, params, trials=20_000, seed=5)
    expected = longrange_success_prob(k, honest_wins_prob(params))
    assert abs(result.success_rate - expected) < Z * math.sqrt(expected * (1 - expected) / result.trials)


def test_attacker_without_power_never_wins():
    result = run_longrange_sim(1, make_params(0.0, 0.005, 0.001), trials=100)
    assert result.success_rate == 0.0
    assert result.failures == 100


def test_same_seed_same_outcome():
    params = make_params(0.4, 0.02, 0.005)
    first = run_longrange_sim(2, params, trials=500, seed=3)
    assert first == run_longrange_sim(2, params, trials=500, seed=3)
    assert run_random_walk_sim(2, 0.6, 500, seed=9) == run_random_walk_sim(2, 0.6, 500, seed=9)


def test_step_limit_censors_undecided_trials():
    result = run_random_walk_sim(50, 0.6, trials=200, seed=2, max_steps=5, abandon_tolerance=1e-300)
    assert result.censored == 200
    assert math.isnan(result.success_rate)
    assert (result.rate_low, result.rate_high) == (0.0, 1.0)


def test_undecided_walks_without_honest_drift_end_in_success():
    result = run_random_walk_sim(50, 0.5, trials=200, seed=2, max_steps=5)
    assert result.censored == 0
    assert result.success_rate == 1.0


def test_honest_majority_below_half_eta_is_decided():
    """eta = 1/3 still gives the walk a give-up point, so failures are counted."""
    params = make_params(0.1, 0.0005, 0.001)
    result = run_longrange_sim(1, params, trials=400, seed=4, max_steps=10**5)
    expected = longrange_success_prob(1, honest_race_prob(params))
    assert result.censored == 0
    assert result.failures > 0
    assert result.successes + result.failures == result.trials
    assert abs(result.success_rate - expected) < Z * math.sqrt(expected * (1 - expected) / result.trials)


def test_attacker_favoured_race_always_catches_up():
    params = make_params(0.45, 0.0005, 0.001)
    assert honest_race_prob(params) < 0.5
    result = run_longrange_sim(3, params, trials=300, seed=6, max_steps=10**4)
    assert result.success_rate == 1.0
    assert result.censored == 0
    assert result.rate_low == 1.0


def test_attacker_with_all_power_always_wins():
    result = run_longrange_sim(1, make_params(1.0, 0.005, 0.001), trials=100)
    assert result.success_rate == 1.0
    assert result.successes == 100


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(k=-1, p_h=0.6, trials=10),
        dict(k=1.5, p_h=0.6, trials=10),
        dict(k=1, p_h=1.0, trials=10),
        dict(k=1, p_h=0.6, trials=0),
        dict(k=1, p_h=0.6, trials=10, seed=-1),
        dict(k=1, p_h=0.6, trials=10, max_steps=0),
    ],
)
def test_invalid_arguments(kwargs):
    with pytest.raises(DomainError):
        run_random_walk_sim(**kwargs)
