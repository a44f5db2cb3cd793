import math

import numpy as np
import pytest

from analysis.chains import StrategyProfile, build_chain, security_coefficients, steady_state
from analysis.params import ImprovementPair, make_params, params_for_eta
from analysis.rewards import RewardFunction, example_rewards
from analysis.security import (
    check_fs_advantage_monotone,
    check_necessary_conditions,
    check_selfish_security,
    condition_margins,
    grid_margins,
    lambda_grid,
    minimum_secure_eta,
    mirrored_coefficients,
    payoff,
    payoff_from_events,
    secure_region,
    selfish_boundary,
    selfish_security_at,
)

REFERENCE_S = ImprovementPair(1.0, 1.0001)
S_2_3 = ImprovementPair(2.0, 3.0)


@pytest.mark.parametrize(
    "profile, miner",
    [
        (StrategyProfile.HH, 1),
        (StrategyProfile.HH, 2),
        (StrategyProfile.FSH, 1),
        (StrategyProfile.HIF, 2),
    ],
)
def test_closed_payoffs_match_reward_events(profile, miner):
    params = make_params(0.35, 0.004, 0.0015)
    R = RewardFunction.power(1.2, 0.5, 1.0, S_2_3.max_argument)
    chain = build_chain(profile, params)

    closed = payoff(profile, miner, params, R, S_2_3)
    from_events = payoff_from_events(chain, steady_state(chain), miner, R, S_2_3)

    assert closed == pytest.approx(from_events, rel=1e-12)


def test_constant_reward_honest_payoffs_add_up_to_block_rate():
    """Under H,H with R = 1 the two payoffs sum to the block rate."""
    params = make_params(0.4, 0.005, 0.001)
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    total = payoff(StrategyProfile.HH, 1, params, R, S_2_3) + payoff(StrategyProfile.HH, 2, params, R, S_2_3)
    chain = build_chain(StrategyProfile.HH, params)
    w = steady_state(chain)
    block_rate = sum(w[chain.index[t.source]] * t.probability for t in chain.reward_events)
    assert total == pytest.approx(block_rate)


@pytest.mark.parametrize("lambda_s", [0.1, 0.25, 0.4, 0.5])
@pytest.mark.parametrize("name", ["R1", "R2", "R4", "R5"])
def test_coefficient_and_payoff_forms_agree(lambda_s, name):
    R = example_rewards(S_2_3.max_argument)[name]
    verdict = selfish_security_at(lambda_s, 0.005, 0.001, R, S_2_3)
    assert verdict.forms_agree
    assert verdict.secure == verdict.payoff_secure


def test_reference_point_verdicts():
    """R1-R3 deter both deviations at the reference point; R4 and R5 invite ignore-and-fork."""
    rewards = example_rewards(REFERENCE_S.max_argument)
    expected = {"R1": True, "R2": True, "R3": True, "R4": False, "R5": False}
    for name, secure in expected.items():
        verdict = selfish_security_at(0.5, 0.005, 0.001, rewards[name], REFERENCE_S)
        assert verdict.secure is secure, name
        assert verdict.fs_secure, name

    coeffs = security_coefficients(make_params(0.5, 0.005, 0.001))
    assert check_necessary_conditions(coeffs) == (True, True)
    assert coeffs.alpha1 + coeffs.beta1 - coeffs.gamma1 == pytest.approx(2.574, rel=1e-2)
    assert coeffs.alpha2 + coeffs.beta2 + coeffs.gamma2 == pytest.approx(14.546, rel=1e-2)
    _, if_margin = condition_margins(coeffs, rewards["R5"], REFERENCE_S)
    assert if_margin == pytest.approx(-8.42, rel=2e-2)


def test_mirrored_coefficients_reduce_to_plain_at_half():
    plain = security_coefficients(make_params(0.5, 0.005, 0.001))
    mirrored = mirrored_coefficients(0.5, 0.005, 0.001)
    assert mirrored.alpha1 == pytest.approx(plain.alpha1)
    assert mirrored.gamma2 == pytest.approx(plain.gamma2)


def test_check_selfish_security_matches_mirrored_form_at_half():
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    direct = check_selfish_security(make_params(0.5, 0.005, 0.001), R, S_2_3)
    mirrored = selfish_security_at(0.5, 0.005, 0.001, R, S_2_3)
    assert direct.fs_margin == pytest.approx(mirrored.fs_margin)
    assert direct.if_margin == pytest.approx(mirrored.if_margin)


def test_equal_rates_are_insecure_everywhere():
    """With p0 = q0 no selfish share on the grid is deterred by a constant reward."""
    R = RewardFunction.constant(1.0, 1.5)
    fs, if_ = grid_margins(0.001, 0.001, lambda_grid(1e-3), R, ImprovementPair(1.0, 1.5))
    assert not np.any((fs > 0) & (if_ > 0))


@pytest.mark.parametrize("p0, secure", [(0.0005, False), (0.001, False), (0.005, True)])
def test_constant_reward_pattern_over_lambda(p0, secure):
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    fs, if_ = grid_margins(p0, 0.001, lambda_grid(0.01), R, S_2_3)
    verdicts = (fs > 0) & (if_ > 0)
    assert np.all(verdicts) if secure else not np.any(verdicts)


def test_small_selfish_share_needs_solution_heavy_rates():
    """For a small fork-and-steal share, constant rewards hold iff p0/q0 exceeds 2."""
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    low, _ = grid_margins(0.0005, 0.001, np.array([0.01]), R, S_2_3)
    high, _ = grid_margins(0.005, 0.001, np.array([0.01]), R, S_2_3)
    assert low[0] < 0 < high[0]


def test_lambda_grid():
    grid = lambda_grid(0.05)
    assert len(grid) == 10
    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == 0.5
    with pytest.raises(ValueError):
        lambda_grid(0.0)


def test_selfish_boundary_is_full_when_secure():
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    assert selfish_boundary(0.005, 0.001, R, S_2_3, resolution=0.01) == 0.5
    assert selfish_boundary(0.001, 0.001, R, S_2_3, resolution=0.01) == 0.0


def test_selfish_boundary_is_refined_inside_grid_cell():
    """Between the all-insecure and all-secure rates the boundary sits at the sign change, not on a grid point."""
    interior = 0
    for s in (REFERENCE_S, S_2_3):
        R = RewardFunction.constant(1.0, s.max_argument)
        for eta in np.round(np.arange(0.66, 0.845, 0.02), 2):
            params = params_for_eta(eta, 0.5, mode="fix-sum", budget=0.006)
            boundary = selfish_boundary(params.p0, params.q0, R, s, resolution=0.01)
            if not 0 < boundary < 0.5:
                continue
            interior += 1
            assert boundary == pytest.approx(
                selfish_boundary(params.p0, params.q0, R, s, resolution=1e-3), abs=1e-6
            )
            inside = np.linspace(1e-3, boundary - 1e-6, 400)
            fs, if_ = grid_margins(params.p0, params.q0, inside, R, s)
            assert np.all((fs > 0) & (if_ > 0))
            fs, if_ = grid_margins(params.p0, params.q0, np.array([boundary + 1e-6]), R, s)
            assert min(fs[0], if_[0]) <= 0
    assert interior > 0


@pytest.mark.slow
def test_secure_region_structure():
    """Boundaries vanish up to eta = 1/2, widen with reward steepness and sit under the long-range curve."""
    etas = np.round(np.arange(0.40, 0.951, 0.05), 2)
    rewards = [
        RewardFunction.constant(1.0, REFERENCE_S.max_argument),
        RewardFunction.linear(0.5, 1.0, REFERENCE_S.max_argument),
        RewardFunction.linear(1.0, 1.0, REFERENCE_S.max_argument),
    ]
    regions = [secure_region(R, REFERENCE_S, etas, lambda_resolution=1e-3) for R in rewards]

    for region in regions:
        below = region.eta <= 0.5
        assert np.all(region.selfish_boundary[below] == 0)
        assert np.all(np.isnan(region.malice_boundary[region.eta <= 0.5]))
        above = region.eta > 0.5
        assert np.all(region.malice_boundary[above] < 0.5)
        assert np.all(region.malice_boundary[above] < region.longrange_bound[above])
        assert np.all(np.diff(region.malice_boundary[above]) >= 0)

    flat, gentle, steep = (region.selfish_boundary for region in regions)
    assert np.all(flat <= gentle)
    assert np.all(gentle <= steep)
    assert np.any(flat < steep)


def test_minimum_secure_eta_and_monotone_advantage():
    R = RewardFunction.constant(1.0, S_2_3.max_argument)
    grid = np.round(np.arange(0.51, 0.96, 0.01), 2)
    for lambda_s in (0.15, 0.3, 0.45):
        threshold = minimum_secure_eta(lambda_s, R, S_2_3, grid)
        assert not math.isnan(threshold)
        assert 0.5 < threshold <= 0.84
        assert check_fs_advantage_monotone(lambda_s, R, S_2_3, grid)

    assert math.isnan(minimum_secure_eta(0.3, R, S_2_3, [0.2, 0.3]))
