# runner.py
from __future__ import annotations

from utils.logger import get_logger

from .behavioral import run_behavioral
from .chain_exact import run_chain_exact
from .config import SimConfig, SimMode
from .results import SimResult
from .rng import make_streams

logger = get_logger(__name__)

_ENGINES = {
    SimMode.CHAIN_EXACT: run_chain_exact,
    SimMode.BEHAVIORAL: run_behavioral,
}


def run_mining_sim(config: SimConfig) -> SimResult:
    """Run one mining simulation; identical configs give identical results."""
    logger.debug(
        "simulating %s (%s) for %d rounds, seed=%d",
        config.profile.value, config.mode.value, config.rounds, config.seed,
    )
    result = _ENGINES[config.mode](config, make_streams(config.seed))
    logger.info(
        "%s %s: reward/round = (%.6g, %.6g), forks %d/%d",
        config.profile.value,
        config.mode.value,
        *result.reward_per_round,
        result.forks_succeeded,
        result.forks_attempted,
    )
    return result
