import math

import numpy as np
import pytest

from analysis.errors import DegenerateError, DomainError, NotApplicableError
from analysis.malice import (
    RaceVariables,
    approx_malice_boundary,
    approx_malice_condition,
    approx_malice_margin,
    check_malice_security,
    honest_race_prob,
    honest_wins_prob,
    longrange_necessary_bound,
    longrange_success_prob,
    malice_boundary,
    minimum_eta_for_malice,
    race_variables,
    race_win_prob,
)
from analysis.params import make_params


def _product_form(p2, q2, q1):
    """P(T2o + T2p < T1) via the generating functions of the two honest clocks."""
    return (1 - q1) ** 2 * p2 * q2 / ((q1 + p2 - q1 * p2) * (q1 + q2 - q1 * q2))


def test_necessary_bound():
    assert longrange_necessary_bound(0.5) == pytest.approx(1 / 3)
    assert longrange_necessary_bound(5 / 6) == pytest.approx(5 / 11)
    with pytest.raises(DomainError):
        longrange_necessary_bound(1.0)


def test_gamblers_ruin():
    assert longrange_success_prob(0, 0.6) == pytest.approx(2 / 3)
    assert longrange_success_prob(3, 0.6) == pytest.approx((2 / 3) ** 4)
    assert longrange_success_prob(5, 0.5) == 1.0
    assert longrange_success_prob(5, 0.3) == 1.0
    probabilities = [longrange_success_prob(k, 0.7) for k in range(6)]
    assert all(b < a for a, b in zip(probabilities, probabilities[1:]))
    with pytest.raises(DomainError):
        longrange_success_prob(-1, 0.6)


@pytest.mark.parametrize(
    "p2, q2, q1",
    [(0.5, 0.2, 0.1), (0.004, 0.0008, 0.0003), (0.9, 0.3, 0.0), (0.01, 0.02, 0.005)],
)
def test_race_closed_form(p2, q2, q1):
    assert race_win_prob(RaceVariables(p2, q2, q1)) == pytest.approx(_product_form(p2, q2, q1), rel=1e-10)


def test_race_without_attacker_is_always_won():
    assert race_win_prob(RaceVariables(0.3, 0.1, 0.0)) == pytest.approx(1.0)


@pytest.mark.slow
@pytest.mark.parametrize(
    "lambda1, p0, q0",
    [
        (0.3, 0.05, 0.01),
        (0.45, 0.05, 0.01),
        (0.2, 0.08, 0.02),
        (0.4, 0.03, 0.02),
        (0.1, 0.02, 0.005),
        (0.3, 0.005, 0.001),
    ],
)
def test_race_against_geometric_sampling(lambda1, p0, q0):
    params = make_params(lambda1, p0, q0)
    rng = np.random.default_rng(17)
    n = 10**6
    honest = rng.geometric(params.p2, n) + rng.geometric(params.q2, n)
    estimate = float(np.mean(honest < rng.geometric(params.q1, n)))
    stderr = math.sqrt(estimate * (1 - estimate) / n)
    assert abs(estimate - honest_wins_prob(params)) < 4 * stderr


def test_honest_wins_prob_preconditions():
    with pytest.raises(DegenerateError):
        honest_wins_prob(make_params(0.3, 0.001, 0.001))
    with pytest.raises(NotApplicableError):
        honest_wins_prob(make_params(0.3, 0.0005, 0.001))
    with pytest.raises(DegenerateError):
        RaceVariables(0.2, 0.2, 0.1)
    with pytest.raises(DomainError) as excinfo:
        RaceVariables(0.0, 0.2, 0.1)
    assert excinfo.value.field == "p2"


def test_malice_verdicts():
    strong_honest = make_params(0.1, 0.005, 0.001)
    weak_honest = make_params(0.45, 0.005, 0.001)
    assert check_malice_security(strong_honest)
    assert not check_malice_security(weak_honest)
    assert race_variables(strong_honest).q1 == strong_honest.q1


def test_approximation_is_continuous_limit():
    """The approximate margin equals the continuous-time honest win probability minus 1/2."""
    for lambda1 in (0.1, 0.3, 0.45):
        for eta in (0.6, 5 / 6, 0.9):
            a = eta / (1 - eta)
            continuous = (1 - lambda1) ** 2 * a / ((1 - lambda1) * a + lambda1)
            assert approx_malice_margin(lambda1, eta) == pytest.approx(continuous - 0.5)

    assert approx_malice_condition(0.3, 5 / 6)
    assert not approx_malice_condition(0.45, 0.6)
    with pytest.raises(DomainError):
        approx_malice_margin(0.3, 0.5)


def test_honest_race_at_long_range_bound():
    """At lambda1 = eta/(1+eta) the honest side wins fewer than half the races."""
    for eta in (0.6, 0.75, 0.9):
        lam = longrange_necessary_bound(eta)
        margin = approx_malice_margin(lam, eta)
        assert margin + 0.5 == pytest.approx(1 / (2 + eta - eta**2))
        assert margin < 0


@pytest.mark.parametrize("eta", [0.6, 0.75, 0.9])
def test_approximate_boundary_tracks_exact(eta):
    budget = 0.001
    exact = malice_boundary(eta * budget, (1 - eta) * budget)
    assert 0 < exact < 0.5
    assert exact < longrange_necessary_bound(eta)
    assert approx_malice_boundary(eta) == pytest.approx(exact, abs=0.01)


def test_honest_win_curve_crosses_half_once():
    etas = np.linspace(0.501, 0.999, 200)
    for lambda1 in (0.3, 0.35, 0.4, 0.45):
        curve = np.array(
            [honest_wins_prob(make_params(lambda1, eta * 0.002, (1 - eta) * 0.002)) for eta in etas]
        )
        assert np.all(np.diff(curve) > 0)
        crossings = np.flatnonzero(np.diff(np.sign(curve - 0.5)) != 0)
        assert len(crossings) == 1

        threshold = minimum_eta_for_malice(lambda1)
        assert etas[crossings[0]] <= threshold <= etas[crossings[0] + 1]


def test_minimum_eta_for_malice_has_no_solution_for_majority_attackers():
    assert math.isnan(minimum_eta_for_malice(0.55))


def test_honest_race_covers_both_sides_of_half_eta():
    for lambda1, p0, q0 in [(0.3, 0.005, 0.001), (0.45, 0.05, 0.01), (0.1, 0.0005, 0.001)]:
        params = make_params(lambda1, p0, q0)
        assert honest_race_prob(params) == pytest.approx(_product_form(params.p2, params.q2, params.q1), rel=1e-12)
        if params.eta > 0.5:
            assert honest_race_prob(params) == pytest.approx(honest_wins_prob(params), rel=1e-10)
    assert honest_race_prob(make_params(0.3, 0.001, 0.001)) < 0.5
    with pytest.raises(DomainError):
        honest_race_prob(make_params(1.0, 0.005, 0.001))


@pytest.mark.parametrize("p2, q2", [(0.004, 0.0008), (0.2, 0.05), (0.01, 0.009)])
def test_honest_win_prob_falls_as_attacker_speeds_up(p2, q2):
    curve = [race_win_prob(RaceVariables(p2, q2, q1)) for q1 in np.linspace(0.0, 0.5, 60)]
    assert np.all(np.diff(curve) < 0)


def test_attacker_at_long_range_bound_is_never_deterred():
    checked = 0
    for eta in np.round(np.arange(0.55, 0.96, 0.05), 2):
        bound = longrange_necessary_bound(eta)
        for budget in (0.002, 0.006, 0.02):
            for lambda1 in np.linspace(bound, 0.95, 8):
                assert not check_malice_security(make_params(lambda1, eta * budget, (1 - eta) * budget))
                checked += 1
    assert checked == 9 * 3 * 8
