import numpy as np
import pytest

from analysis.chains import StrategyProfile, build_chain, steady_state
from analysis.errors import DomainError
from analysis.params import ImprovementPair, make_params
from analysis.rewards import RewardFunction
from analysis.security import payoff
from simulation import SimConfig, SimMode, TieRule, derive_seed, make_streams, run_mining_sim
from simulation.behavioral import OVERFLOW
from simulation.results import BatchLedger

S = ImprovementPair(2.0, 3.0)
R_CONSTANT = RewardFunction.constant(1.0, S.max_argument)
R_LINEAR = RewardFunction.linear(0.5, 1.0, S.max_argument)

# Wider than 3 standard errors because each test checks a family of estimates.
Z = 4.0


def _config(profile, lambda1=0.4, p0=0.005, q0=0.001, rounds=10**6, seed=3, s=S, **kwargs):
    return SimConfig(
        profile=profile,
        params=make_params(lambda1, p0, q0),
        reward=kwargs.pop("reward", R_LINEAR),
        s=s,
        rounds=rounds,
        seed=seed,
        **kwargs,
    )


def test_config_validation():
    with pytest.raises(DomainError):
        _config(StrategyProfile.HH, rounds=0)
    with pytest.raises(DomainError):
        _config(StrategyProfile.HH, seed=-1)
    with pytest.raises(DomainError):
        _config(StrategyProfile.HH, reward=RewardFunction.constant(1.0, 2.0))
    with pytest.raises(DomainError):
        _config(StrategyProfile.HH, batches=1)
    assert _config("FSH", mode="behavioral", tie_rule="party2").tie_rule is TieRule.PARTY2


def test_seed_streams():
    assert derive_seed(10, 3) == 9
    a, b = make_streams(5), make_streams(5)
    assert a.events.random() == b.events.random()
    assert make_streams(5).events.random() != make_streams(6).events.random()


def test_batch_ledger_splits_rounds():
    ledger = BatchLedger(rounds=10, batches=4)
    ledger.occupy(0, 0, 10)
    ledger.credit(9, 1, 2.0)
    result = ledger.result("HH", "chain_exact", 0)
    assert result.occupancy == {0: 1.0}
    assert result.total_reward == (0.0, 2.0)
    assert result.blocks_mined == (0, 1)


@pytest.mark.parametrize("mode", list(SimMode))
def test_identical_seeds_reproduce(mode):
    config = _config(StrategyProfile.HIF, rounds=2 * 10**5, mode=mode)
    assert run_mining_sim(config) == run_mining_sim(config)
    other = run_mining_sim(_config(StrategyProfile.HIF, rounds=2 * 10**5, mode=mode, seed=4))
    assert other.total_reward != run_mining_sim(config).total_reward


@pytest.mark.parametrize("mode", list(SimMode))
def test_result_invariants(mode):
    result = run_mining_sim(_config(StrategyProfile.FSH, rounds=3 * 10**5, mode=mode))
    assert sum(result.occupancy.values()) == pytest.approx(1.0)
    assert result.forks_succeeded <= result.forks_attempted
    assert result.forks_attempted > 0
    for miner in (0, 1):
        assert result.reward_per_round[miner] * result.rounds == pytest.approx(result.total_reward[miner])


@pytest.mark.parametrize("mode", list(SimMode))
def test_powerless_selfish_party_earns_nothing(mode):
    result = run_mining_sim(_config(StrategyProfile.FSH, lambda1=0.0, rounds=10**5, mode=mode))
    assert result.total_reward[0] == 0
    assert result.blocks_mined[0] == 0
    assert result.total_reward[1] > 0


@pytest.mark.slow
@pytest.mark.parametrize("profile", list(StrategyProfile))
@pytest.mark.parametrize("lambda1", [0.2, 0.45])
def test_chain_exact_rewards_match_payoffs(profile, lambda1):
    config = _config(profile, lambda1=lambda1)
    result = run_mining_sim(config)
    for miner in (1, 2):
        expected = payoff(profile, miner, config.params, config.reward, S)
        mean, stderr = result.reward_per_round[miner - 1], result.reward_stderr[miner - 1]
        assert abs(mean - expected) < Z * stderr, (miner, mean, expected, stderr)


@pytest.mark.slow
@pytest.mark.parametrize("profile", list(StrategyProfile))
def test_chain_exact_occupancy_matches_steady_state(profile):
    config = _config(profile, lambda1=0.35, p0=0.004, q0=0.002, seed=11)
    result = run_mining_sim(config)
    chain = build_chain(profile, config.params)
    for state, w in zip(chain.states, steady_state(chain)):
        observed = result.occupancy.get(state, 0.0)
        stderr = result.occupancy_stderr.get(state, 0.0)
        if w == 0:
            assert observed == 0
        else:
            assert abs(observed - w) < Z * stderr + 1e-4, (state, observed, w)


@pytest.mark.slow
@pytest.mark.parametrize("profile", list(StrategyProfile))
def test_behavioral_agrees_with_chain_when_truncated(profile):
    config = _config(profile, lambda1=0.4, mode=SimMode.BEHAVIORAL, seed=21)
    result = run_mining_sim(config)
    assert OVERFLOW not in result.occupancy
    for miner in (1, 2):
        expected = payoff(profile, miner, config.params, config.reward, S)
        mean, stderr = result.reward_per_round[miner - 1], result.reward_stderr[miner - 1]
        assert abs(mean - expected) < Z * stderr, (miner, mean, expected, stderr)


@pytest.mark.slow
def test_behavioral_occupancy_labels_follow_the_chain():
    config = _config(StrategyProfile.HIF, lambda1=0.5, p0=0.004, q0=0.002, mode=SimMode.BEHAVIORAL, seed=5)
    result = run_mining_sim(config)
    chain = build_chain(StrategyProfile.HIF, config.params)
    assert set(result.occupancy) <= set(chain.states)
    assert result.occupancy.get(20, 0.0) > 0
    for state, w in zip(chain.states, steady_state(chain)):
        observed = result.occupancy.get(state, 0.0)
        assert abs(observed - w) < Z * result.occupancy_stderr.get(state, 0.0) + 2e-3, (state, observed, w)


def test_untruncated_runs_can_leave_the_chain():
    """Without truncation long carry-over runs show up as overflow occupancy."""
    # 3*s1 > 2*s2, so the slower party's third solution can survive a fourth block.
    s = ImprovementPair(2.0, 2.5)
    params = dict(lambda1=0.5, p0=0.02, q0=0.02, rounds=10**6, mode=SimMode.BEHAVIORAL, seed=8, s=s)
    loose = run_mining_sim(_config(StrategyProfile.HH, truncate_at_state9=False, **params))
    strict = run_mining_sim(_config(StrategyProfile.HH, **params))
    assert loose.occupancy.get(OVERFLOW, 0.0) > 0
    assert OVERFLOW not in strict.occupancy


def test_tie_rules_are_deterministic():
    base = dict(lambda1=0.5, p0=0.02, q0=0.05, rounds=2 * 10**5, mode=SimMode.BEHAVIORAL, seed=9)
    first = run_mining_sim(_config(StrategyProfile.HH, tie_rule=TieRule.PARTY1, **base))
    second = run_mining_sim(_config(StrategyProfile.HH, tie_rule=TieRule.PARTY2, **base))
    assert first.blocks_mined != second.blocks_mined
    assert np.isclose(sum(first.occupancy.values()), 1.0)
