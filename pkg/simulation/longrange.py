# longrange.py
"""
Monte-Carlo estimate of a long-range attack: the attacker starts k blocks
behind and redoes proofs of work while the honest side keeps extending its
chain. Every trial is a random walk on the attacker's deficit, advanced for
all trials at once with numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from analysis.errors import DomainError
from analysis.malice import honest_race_prob
from analysis.params import NetworkParams
from utils.logger import get_logger

from .rng import SEED_MASK, make_generator

logger = get_logger(__name__)

# Two-sided 95% normal quantile for the Wilson interval.
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class LongRangeResult:
    """Outcome counts of a batch of attack trials.

    ``abandoned`` trials fell so far behind that catching up is below the
    tolerance and count as failures; ``censored`` trials hit the step limit
    and are left out of ``success_rate``. ``rate_low`` and ``rate_high``
    bound the rate over all trials, counting censored trials as failures or
    as successes.
    """
    success_rate: float
    stderr: float
    ci_low: float
    ci_high: float
    successes: int
    failures: int
    abandoned: int
    censored: int
    trials: int
    rate_low: float
    rate_high: float


def _wilson(successes: int, n: int) -> tuple[float, float]:
    if n == 0:
        return math.nan, math.nan
    rate = successes / n
    denom = 1.0 + _Z95**2 / n
    centre = (rate + _Z95**2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(rate * (1 - rate) / n + _Z95**2 / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _summarize(successes: int, failures: int, abandoned: int, censored: int, trials: int) -> LongRangeResult:
    decided = successes + failures
    rate = successes / decided if decided else math.nan
    stderr = math.sqrt(rate * (1 - rate) / decided) if decided else math.nan
    low, high = _wilson(successes, decided)
    if censored:
        logger.warning("%d of %d trials hit the step limit and were censored", censored, trials)
    return LongRangeResult(
        success_rate=rate,
        stderr=stderr,
        ci_low=low,
        ci_high=high,
        successes=successes,
        failures=failures,
        abandoned=abandoned,
        censored=censored,
        trials=trials,
        rate_low=successes / trials,
        rate_high=(successes + censored) / trials,
    )


def _validate(k: int, trials: int, seed: int, max_steps: int) -> None:
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a non-negative integer, got {k!r}", field="k")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials!r}", field="trials")
    if max_steps < 1:
        raise DomainError(f"max_steps must be positive, got {max_steps!r}", field="max_steps")
    if not 0 <= seed <= SEED_MASK:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}", field="seed")


def _walk(k: int, honest_steps, trials: int, max_steps: int, p_h: float, tolerance: float) -> LongRangeResult:
    """Run the deficit walk; ``honest_steps(n)`` draws n booleans, True when the honest side wins.

    ``p_h`` is the per-block honest win probability that sets when a trial
    is abandoned (p_h > 1/2) or certain to succeed eventually (p_h <= 1/2).
    """
    lead = np.full(trials, k, dtype=np.int64)
    active = np.ones(trials, dtype=bool)
    success = np.zeros(trials, dtype=bool)
    abandoned = np.zeros(trials, dtype=bool)
    rho = (1.0 - p_h) / p_h
    # Beyond this lead the chance of ever catching up is below the tolerance.
    give_up = None
    if rho < 1 and tolerance > 0:
        give_up = max(k + 1, int(math.ceil(math.log(tolerance) / math.log(rho))))

    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        honest = honest_steps(idx.size)
        lead[idx] += np.where(honest, 1, -1)
        won = lead[idx] < 0
        success[idx[won]] = True
        active[idx[won]] = False
        if give_up is not None:
            lost = lead[idx] >= give_up
            abandoned[idx[lost]] = True
            active[idx[lost]] = False

    n_success = int(success.sum())
    n_abandoned = int(abandoned.sum())
    censored = int(active.sum())
    if rho >= 1 and censored:
        # A walk without drift away from the attacker catches up with probability 1.
        logger.info("%d undecided trials resolved as successes (p_h=%.6g <= 1/2)", censored, p_h)
        n_success += censored
        censored = 0
    return _summarize(n_success, n_abandoned, n_abandoned, censored, trials)


def run_random_walk_sim(
    k: int,
    p_h: float,
    trials: int,
    seed: int = 0,
    max_steps: int = 10**6,
    abandon_tolerance: float = 1e-9,
) -> LongRangeResult:
    """Attack with a known per-block honest win probability ``p_h``."""
    _validate(k, trials, seed, max_steps)
    if not 0 < p_h < 1:
        raise DomainError(f"p_h must lie in (0, 1), got {p_h!r}", field="p_h")
    rng = make_generator(seed)
    return _walk(k, lambda n: rng.random(n) < p_h, trials, max_steps, p_h, abandon_tolerance)


def run_longrange_sim(
    k: int,
    params: NetworkParams,
    trials: int,
    seed: int = 0,
    max_steps: int = 10**7,
    abandon_tolerance: float = 1e-9,
) -> LongRangeResult:
    """Attack race drawn from the mining clocks themselves.

    Each block the honest side needs T2o ~ Geom(p2) rounds for a solution
    plus T2p ~ Geom(q2) for its nonce; the attacker needs T1p ~ Geom(q1).
    The honest side takes the block iff T2o + T2p < T1p.
    """
    _validate(k, trials, seed, max_steps)
    if params.q1 == 0:
        return _summarize(0, trials, 0, 0, trials)
    if params.p2 == 0 or params.q2 == 0:
        # No honest power left: the attacker alone extends a chain.
        return _summarize(trials, 0, 0, 0, trials)
    rng = make_generator(seed)

    def honest_steps(n: int) -> np.ndarray:
        honest = rng.geometric(params.p2, n) + rng.geometric(params.q2, n)
        return honest < rng.geometric(params.q1, n)

    result = _walk(k, honest_steps, trials, max_steps, honest_race_prob(params), abandon_tolerance)
    logger.info(
        "long-range k=%d lambda1=%.4f eta=%.4f: %d/%d successes",
        k, params.lambda1, params.eta, result.successes, result.trials,
    )
    return result
