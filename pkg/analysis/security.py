# security.py
"""
Expected payoffs per round and the security conditions against selfish
mining, at a single point or over a grid of (eta, lambda_s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from utils.logger import get_logger

from .chains import (
    Argument,
    ChainSpec,
    SecurityCoefficients,
    StrategyProfile,
    build_chain,
    coefficient_arrays,
    security_coefficients,
    steady_state,
)
from .malice import longrange_necessary_bound, malice_boundary
from .params import EtaMode, ImprovementPair, NetworkParams, make_params, params_for_eta
from .rewards import RewardFunction, evaluate

logger = get_logger(__name__)

DEFAULT_ETA_GRID = tuple(np.round(np.arange(0.50, 0.951, 0.01), 2))


def _rewards(R: RewardFunction, s: ImprovementPair) -> dict[Argument, float]:
    return {a: float(evaluate(R, a.of(s))) for a in Argument}


def payoff_from_events(chain: ChainSpec, w: np.ndarray, miner: int, R: RewardFunction, s: ImprovementPair) -> float:
    """Expected reward per round of one miner, summed over the chain's reward events."""
    index = chain.index
    r = _rewards(R, s)
    total = 0.0
    for t in chain.reward_events:
        for term in t.rewards:
            if term.miner == miner:
                total += w[index[t.source]] * t.probability * term.count * r[term.argument]
    return total


def payoff(
    profile: StrategyProfile,
    miner: int,
    params: NetworkParams,
    R: RewardFunction,
    s: ImprovementPair,
) -> float:
    """Expected reward per round of ``miner`` under ``profile``.

    The deviating party's payoff and both honest-profile payoffs use the
    closed formulas; the honest party facing a selfish miner is summed from
    the chain's reward events.

    Raises:
        DomainError: If a reward argument exceeds R.s_m.
    """
    profile = StrategyProfile(profile)
    if miner not in (1, 2):
        raise ValueError(f"miner must be 1 or 2, got {miner!r}")
    chain = build_chain(profile, params)
    w = dict(zip(chain.states, steady_state(chain)))
    r = _rewards(R, s)
    q1, q2 = params.q1, params.q2

    if profile is StrategyProfile.HH and miner == 1:
        return q1 * ((w[2] + w[3] + w[5] + w[9]) * r[Argument.S1] + (w[6] + w[7]) * r[Argument.TWO_S1_MINUS_S2])
    if profile is StrategyProfile.HH and miner == 2:
        return q2 * (
            (w[1] + w[3] + w[7]) * r[Argument.S2]
            + (w[4] + w[5]) * r[Argument.S2_MINUS_S1]
            + (w[8] + w[9]) * r[Argument.TWO_S2_MINUS_TWO_S1]
        )
    if profile is StrategyProfile.FSH and miner == 1:
        return q1 * (
            (w[2] + w[3] + w[5] + w[9]) * r[Argument.S1]
            + (w[6] + w[7]) * r[Argument.TWO_S1_MINUS_S2]
            + (w[12] + w[13]) * (r[Argument.S2_MINUS_S1] + r[Argument.S1])
        )
    if profile is StrategyProfile.HIF and miner == 2:
        return q2 * (
            (w[1] + w[3] + 2 * w[16] + 2 * w[19]) * r[Argument.S2]
            + (w[20] + w[21]) * r[Argument.TWO_S2_MINUS_TWO_S1]
        )
    return payoff_from_events(chain, np.array(list(w.values())), miner, R, s)


def condition_margins(coeffs, R: RewardFunction, s: ImprovementPair):
    """Left-hand sides of the FS and IF inequalities; both must be positive.

    ``coeffs`` is a SecurityCoefficients or the tuple from coefficient_arrays.
    """
    if isinstance(coeffs, SecurityCoefficients):
        coeffs = (coeffs.alpha1, coeffs.beta1, coeffs.gamma1, coeffs.alpha2, coeffs.beta2, coeffs.gamma2)
    alpha1, beta1, gamma1, alpha2, beta2, gamma2 = coeffs
    r = _rewards(R, s)
    fs = alpha1 * r[Argument.S1] + beta1 * r[Argument.TWO_S1_MINUS_S2] - gamma1 * r[Argument.S2_MINUS_S1]
    if_ = alpha2 * r[Argument.S2] + beta2 * r[Argument.S2_MINUS_S1] + gamma2 * r[Argument.TWO_S2_MINUS_TWO_S1]
    return fs, if_


@dataclass(frozen=True)
class SelfishVerdict:
    """Both forms of the selfish-mining security test."""
    fs_margin: float
    if_margin: float
    fs_payoff_gap: float
    if_payoff_gap: float

    @property
    def fs_secure(self) -> bool:
        return self.fs_margin > 0

    @property
    def if_secure(self) -> bool:
        return self.if_margin > 0

    @property
    def secure(self) -> bool:
        return self.fs_secure and self.if_secure

    @property
    def payoff_secure(self) -> bool:
        return self.fs_payoff_gap > 0 and self.if_payoff_gap > 0

    @property
    def forms_agree(self) -> bool:
        return (self.fs_margin > 0) == (self.fs_payoff_gap > 0) and (self.if_margin > 0) == (self.if_payoff_gap > 0)


def _verdict(fs_params: NetworkParams, if_params: NetworkParams, R: RewardFunction, s: ImprovementPair) -> SelfishVerdict:
    fs_margin, _ = condition_margins(security_coefficients(fs_params), R, s)
    _, if_margin = condition_margins(security_coefficients(if_params), R, s)
    verdict = SelfishVerdict(
        fs_margin=float(fs_margin),
        if_margin=float(if_margin),
        fs_payoff_gap=payoff(StrategyProfile.HH, 1, fs_params, R, s) - payoff(StrategyProfile.FSH, 1, fs_params, R, s),
        if_payoff_gap=payoff(StrategyProfile.HH, 2, if_params, R, s) - payoff(StrategyProfile.HIF, 2, if_params, R, s),
    )
    if not verdict.forms_agree:
        logger.warning("coefficient and payoff verdicts disagree (values at float noise): %s", verdict)
    return verdict


def check_selfish_security(params: NetworkParams, R: RewardFunction, s: ImprovementPair) -> SelfishVerdict:
    """Test both deviations at one parameter point."""
    return _verdict(params, params, R, s)


def selfish_security_at(lambda_s: float, p0: float, q0: float, R: RewardFunction, s: ImprovementPair) -> SelfishVerdict:
    """Test a selfish party of share lambda_s in either role.

    Fork-and-steal is played by party 1 (lambda1 = lambda_s), ignore-and-fork
    by party 2 (lambda2 = lambda_s).
    """
    return _verdict(make_params(lambda_s, p0, q0), make_params(1.0 - lambda_s, p0, q0), R, s)


def mirrored_coefficients(lambda_s: float, p0: float, q0: float) -> SecurityCoefficients:
    """Coefficients for a selfish party of share lambda_s in either role.

    The FS terms come from party 1 holding lambda_s, the IF terms from party 2
    holding it; at lambda_s = 1/2 this is the plain coefficient set.
    """
    fs = security_coefficients(make_params(lambda_s, p0, q0))
    if_ = security_coefficients(make_params(1.0 - lambda_s, p0, q0))
    return SecurityCoefficients(
        alpha1=fs.alpha1,
        beta1=fs.beta1,
        gamma1=fs.gamma1,
        alpha2=if_.alpha2,
        beta2=if_.beta2,
        gamma2=if_.gamma2,
        eta=fs.eta,
    )


def check_necessary_conditions(coeffs: SecurityCoefficients) -> tuple[bool, bool]:
    return (
        coeffs.alpha1 + coeffs.beta1 - coeffs.gamma1 > 0,
        coeffs.alpha2 + coeffs.beta2 + coeffs.gamma2 > 0,
    )


def lambda_grid(resolution: float) -> np.ndarray:
    """Selfish shares resolution, 2*resolution, ..., 1/2."""
    if not 0 < resolution <= 0.5:
        raise ValueError(f"lambda resolution must lie in (0, 0.5], got {resolution!r}")
    count = int(round(0.5 / resolution))
    return np.arange(1, count + 1) * (0.5 / count)


def grid_margins(p0: float, q0: float, lambdas: np.ndarray, R: RewardFunction, s: ImprovementPair):
    """FS and IF margins over a grid of selfish shares in one vectorized pass."""
    fs, _ = condition_margins(
        coefficient_arrays(lambdas * p0, (1 - lambdas) * p0, lambdas * q0, (1 - lambdas) * q0), R, s
    )
    _, if_ = condition_margins(
        coefficient_arrays((1 - lambdas) * p0, lambdas * p0, (1 - lambdas) * q0, lambdas * q0), R, s
    )
    return np.asarray(fs), np.asarray(if_)


def selfish_boundary(
    p0: float,
    q0: float,
    R: RewardFunction,
    s: ImprovementPair,
    resolution: float = 1e-3,
    xtol: float = 1e-9,
) -> float:
    """Largest lambda_s such that every share up to it is secure.

    The grid locates the first insecure cell; brentq then pins the crossing
    inside it. Returns 0 when the first grid share already fails.
    """
    lambdas = lambda_grid(resolution)
    fs, if_ = grid_margins(p0, q0, lambdas, R, s)
    failing = np.flatnonzero(~((fs > 0) & (if_ > 0)))
    if failing.size == 0:
        return float(lambdas[-1])
    if failing[0] == 0:
        return 0.0

    def margin(lambda_s: float) -> float:
        fs_at, if_at = grid_margins(p0, q0, np.array([lambda_s]), R, s)
        return float(min(fs_at[0], if_at[0]))

    low, high = float(lambdas[failing[0] - 1]), float(lambdas[failing[0]])
    return float(brentq(margin, low, high, xtol=xtol))


@dataclass(frozen=True)
class SecureRegion:
    eta: np.ndarray
    selfish_boundary: np.ndarray
    malice_boundary: np.ndarray
    longrange_bound: np.ndarray


def secure_region(
    R: RewardFunction,
    s: ImprovementPair,
    eta_grid: Sequence[float] = DEFAULT_ETA_GRID,
    lambda_resolution: float = 1e-3,
    mode: EtaMode = "fix-sum",
    q0: float = 0.001,
    budget: float = 0.006,
) -> SecureRegion:
    """Selfishness boundary per eta, with the maliciousness curves for overlay.

    The malicious boundary is nan where eta <= 1/2 (the honest-race closed
    form is not applicable there).
    """
    etas = np.asarray(eta_grid, dtype=float)
    selfish, malicious = [], []
    for eta in etas:
        params = params_for_eta(float(eta), 0.5, mode=mode, q0=q0, budget=budget)
        selfish.append(selfish_boundary(params.p0, params.q0, R, s, lambda_resolution))
        malicious.append(malice_boundary(params.p0, params.q0) if eta > 0.5 else math.nan)
        logger.debug("eta=%.4f selfish=%.4f malice=%.4f", eta, selfish[-1], malicious[-1])
    return SecureRegion(
        eta=etas,
        selfish_boundary=np.array(selfish),
        malice_boundary=np.array(malicious),
        longrange_bound=np.array([longrange_necessary_bound(float(e)) for e in etas]),
    )


def fs_advantage(lambda_s: float, eta: float, R: RewardFunction, s: ImprovementPair, mode: EtaMode = "fix-q0", q0: float = 0.001, budget: float = 0.006) -> float:
    """pi1(FS,H) - pi1(H,H) for a selfish party 1 of share lambda_s."""
    params = params_for_eta(eta, lambda_s, mode=mode, q0=q0, budget=budget)
    return payoff(StrategyProfile.FSH, 1, params, R, s) - payoff(StrategyProfile.HH, 1, params, R, s)


def minimum_secure_eta(
    lambda_s: float,
    R: RewardFunction,
    s: ImprovementPair,
    eta_grid: Sequence[float],
    mode: EtaMode = "fix-q0",
    q0: float = 0.001,
    budget: float = 0.006,
) -> float:
    """Smallest eta on the grid at which honest mining beats fork-and-steal; nan if none."""
    for eta in sorted(eta_grid):
        if fs_advantage(lambda_s, float(eta), R, s, mode, q0, budget) < 0:
            return float(eta)
    return math.nan


def check_fs_advantage_monotone(
    lambda_s: float,
    R: RewardFunction,
    s: ImprovementPair,
    eta_grid: Sequence[float],
    mode: EtaMode = "fix-q0",
    q0: float = 0.001,
    budget: float = 0.006,
) -> bool:
    """Observed, not proved: the FS advantage does not grow with eta. Logs a warning if it does."""
    advantage = [fs_advantage(lambda_s, float(eta), R, s, mode, q0, budget) for eta in sorted(eta_grid)]
    slack = 1e-12 * max(1.0, max(abs(a) for a in advantage))
    monotone = all(b <= a + slack for a, b in zip(advantage, advantage[1:]))
    if not monotone:
        logger.warning("FS advantage increases with eta somewhere at lambda_s=%.4f", lambda_s)
    return monotone
