# chain_exact.py
"""
Sample the analytic Markov chain of a strategy profile round by round.

Instead of one categorical draw per round, the run draws the geometric
number of rounds spent in the current state and then which exit fires.
Both describe the same process, so occupancy converges to the stationary
distribution and rewards to the analytic payoffs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from analysis.chains import Transition, build_chain
from analysis.rewards import evaluate
from utils.logger import get_logger

from .config import SimConfig
from .results import BatchLedger, SimResult
from .rng import SimStreams

logger = get_logger(__name__)


@dataclass(frozen=True)
class _Exits:
    transitions: tuple[Transition, ...]
    cumulative: np.ndarray
    total: float
    payouts: tuple[tuple[float, float, int, int], ...]


def _exit_table(config: SimConfig) -> dict[int, _Exits]:
    chain = build_chain(config.profile, config.params)
    table = {}
    for state in chain.states:
        out = chain.outgoing(state)
        probabilities = np.array([t.probability for t in out])
        payouts = []
        for t in out:
            amount, blocks = [0.0, 0.0], [0, 0]
            for term in t.rewards:
                amount[term.miner - 1] += term.count * float(evaluate(config.reward, term.argument.of(config.s)))
                blocks[term.miner - 1] += term.count
            payouts.append((amount[0], amount[1], blocks[0], blocks[1]))
        table[state] = _Exits(
            transitions=out,
            cumulative=np.cumsum(probabilities),
            total=float(probabilities.sum()),
            payouts=tuple(payouts),
        )
    return table


def run_chain_exact(config: SimConfig, streams: SimStreams) -> SimResult:
    table = _exit_table(config)
    ledger = BatchLedger(config.rounds, config.batches)
    rng = streams.events
    state, now = 0, 0

    while now < config.rounds:
        exits = table[state]
        if exits.total <= 0:
            ledger.occupy(state, now, config.rounds)
            break
        fire = now + int(rng.geometric(exits.total)) - 1
        if fire >= config.rounds:
            ledger.occupy(state, now, config.rounds)
            break
        ledger.occupy(state, now, fire + 1)

        choice = int(np.searchsorted(exits.cumulative, rng.random() * exits.total, side="right"))
        choice = min(choice, len(exits.transitions) - 1)
        transition = exits.transitions[choice]
        amount1, amount2, blocks1, blocks2 = exits.payouts[choice]
        if blocks1:
            ledger.credit(fire, 0, amount1, blocks1)
        if blocks2:
            ledger.credit(fire, 1, amount2, blocks2)
        if transition.fork_attempt:
            ledger.forks_attempted += 1
        if transition.fork_success:
            ledger.forks_succeeded += 1

        state, now = transition.target, fire + 1

    logger.debug("chain-exact %s finished %d rounds", config.profile.value, config.rounds)
    return ledger.result(config.profile.value, config.mode.value, config.seed)
