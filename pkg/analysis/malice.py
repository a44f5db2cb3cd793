# malice.py
"""
Security against a malicious miner who rewrites history from k blocks deep.

The attacker copies the published solutions and only redoes the proof of
work, so per block it waits T1 ~ Geom(q1) rounds while the honest side
waits T2o ~ Geom(p2) for a solution and then T2p ~ Geom(q2) for a nonce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DegenerateError, DomainError, NotApplicableError
from .params import NetworkParams, make_params

# Lower end of the lambda1 search interval; lambda1 = 0 has no attacker at all.
_LAMBDA_FLOOR = 1e-9


@dataclass(frozen=True)
class RaceVariables:
    """Hit probabilities of the honest solution, honest nonce and attacker nonce clocks."""
    p2: float
    q2: float
    q1: float

    def __post_init__(self):
        for name in ("p2", "q2"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {value!r}", field=name)
        if not 0 <= self.q1 < 1:
            raise DomainError(f"q1 must lie in [0, 1), got {self.q1!r}", field="q1")
        if self.p2 == self.q2:
            raise DegenerateError(
                "p2 = q2 (eta = 1/2): the honest-race closed form divides by p2 - q2"
            )


def race_variables(params: NetworkParams) -> RaceVariables:
    return RaceVariables(p2=params.p2, q2=params.q2, q1=params.q1)


def longrange_necessary_bound(eta: float) -> float:
    """Largest attacker share for which the honest chain still grows faster on average."""
    if not 0 < eta < 1:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}", field="eta")
    return eta / (1.0 + eta)


def longrange_success_prob(k: int, P_h: float) -> float:
    """Probability that an attacker k blocks behind ever overtakes the honest chain.

    Args:
        k: Attack depth in blocks.
        P_h: Probability the honest side wins a single block race.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a non-negative integer, got {k!r}", field="k")
    if not 0 < P_h < 1:
        raise DomainError(f"P_h must lie in (0, 1), got {P_h!r}", field="P_h")
    rho = (1.0 - P_h) / P_h
    return rho ** (k + 1) if rho < 1 else 1.0


def race_win_prob(race: RaceVariables) -> float:
    """P(T2o + T2p < T1) summed in closed form over the attacker's finishing round."""
    p2, q2, q1 = race.p2, race.q2, race.q1
    head = (1.0 - q1) ** 2
    solution_first = q1 * p2 / (p2 - q2) * (1.0 - q2) ** 2 / (q1 + q2 - q1 * q2)
    nonce_first = q1 * q2 / (p2 - q2) * (1.0 - p2) ** 2 / (q1 + p2 - q1 * p2)
    return head * (1.0 - solution_first) + head * nonce_first


def honest_race_prob(params: NetworkParams) -> float:
    """P(T2o + T2p < T1) for any positive honest rates, eta on either side of 1/2.

    Product of the two generating functions; agrees with race_win_prob where
    both are defined.
    """
    p2, q2, q1 = params.p2, params.q2, params.q1
    if not (0 < p2 < 1 and 0 < q2 < 1):
        raise DomainError(f"the honest side needs p2, q2 in (0, 1), got {p2!r}, {q2!r}", field="lambda1")
    return (1.0 - q1) ** 2 * p2 * q2 / ((q1 + p2 - q1 * p2) * (q1 + q2 - q1 * q2))


def honest_wins_prob(params: NetworkParams) -> float:
    """Probability the honest side finishes its next block before the attacker.

    Raises:
        NotApplicableError: If eta <= 1/2.
        DegenerateError: If p2 = q2.
    """
    if params.eta == 0.5:
        raise DegenerateError("eta = 1/2 makes p2 = q2; the closed form is undefined")
    if params.eta < 0.5:
        raise NotApplicableError(f"the honest-race bound is stated for eta > 1/2, got {params.eta:.6g}")
    return race_win_prob(race_variables(params))


def check_malice_security(params: NetworkParams) -> bool:
    return honest_wins_prob(params) > 0.5


def approx_malice_margin(lambda1: float, eta: float) -> float:
    """Small-probability approximation of P_h - 1/2; depends only on lambda1 and eta."""
    if not 0 < lambda1 < 1:
        raise DomainError(f"lambda1 must lie in (0, 1), got {lambda1!r}", field="lambda1")
    if not 0.5 < eta < 1:
        raise DomainError(f"eta must lie in (1/2, 1), got {eta!r}", field="eta")
    odds = eta / (1.0 - eta)
    return (
        0.5
        - lambda1 / (2.0 - 1.0 / eta)
        + 1.0 / ((odds - 1.0) * (1.0 + odds * (1.0 / lambda1 - 1.0)))
    )


def approx_malice_condition(lambda1: float, eta: float) -> bool:
    return approx_malice_margin(lambda1, eta) >= 0


def malice_boundary(p0: float, q0: float, xtol: float = 1e-9) -> float:
    """Largest lambda1 in (0, 1/2] with honest_wins_prob > 1/2 at fixed (p0, q0)."""
    def margin(lambda1: float) -> float:
        return honest_wins_prob(make_params(lambda1, p0, q0)) - 0.5

    if margin(0.5) > 0:
        return 0.5
    if margin(_LAMBDA_FLOOR) <= 0:
        return 0.0
    return float(brentq(margin, _LAMBDA_FLOOR, 0.5, xtol=xtol))


def approx_malice_boundary(eta: float, xtol: float = 1e-9) -> float:
    """Root in lambda1 of the approximate margin, within (0, 1/2]."""
    def margin(lambda1: float) -> float:
        return approx_malice_margin(lambda1, eta)

    if margin(0.5) >= 0:
        return 0.5
    return float(brentq(margin, _LAMBDA_FLOOR, 0.5, xtol=xtol))


def minimum_eta_for_malice(lambda1: float, event_budget: float = 0.002, xtol: float = 1e-9) -> float:
    """Smallest eta above 1/2 at which an attacker of share lambda1 is defeated.

    Returns nan when no eta below 1 suffices (the honest share is too small).
    """
    def margin(eta: float) -> float:
        params = make_params(lambda1, eta * event_budget, (1.0 - eta) * event_budget)
        return honest_wins_prob(params) - 0.5

    low, high = 0.5 + 1e-9, 1.0 - 1e-9
    if margin(low) > 0:
        return low
    if margin(high) <= 0:
        return math.nan
    return float(brentq(margin, low, high, xtol=xtol))
