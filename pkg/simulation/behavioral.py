# behavioral.py
"""
Protocol-level simulation: each miner either solves (hit probability p_i)
or hashes a held solution (q_i) every round, and the honest, fork-and-steal
and ignore-and-fork rules decide what happens when a block appears.

Idle rounds are skipped: the rounds until either miner's event fires are
geometric, and the joint outcome of the firing round is drawn conditionally.
Occupancy is labeled with the analytic state that matches the current
configuration, or OVERFLOW when the run has left the truncated chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from analysis.chains import StrategyProfile
from analysis.rewards import evaluate
from utils.logger import get_logger

from .config import SimConfig, TieRule
from .results import BatchLedger, SimResult
from .rng import SimStreams

logger = get_logger(__name__)

OVERFLOW = -1

# Carry-overs allowed in one honest run before the truncated chain returns to consensus.
MAX_CARRY_OVERS = 3

# Solutions must beat the benchmark by more than float noise.
_EPS = 1e-12

# (carry-overs, miner 1 holds, miner 2 holds) -> analytic state
_HONEST_LABELS = {
    (0, False, False): 0,
    (0, False, True): 1,
    (0, True, False): 2,
    (0, True, True): 3,
    (1, False, True): 4,
    (1, True, True): 5,
    (2, True, False): 6,
    (2, True, True): 7,
    (3, False, True): 8,
    (3, True, True): 9,
}
_AFTER_FORK_LABELS = {(3, False, True): 20, (3, True, True): 21}


class Event(Enum):
    SOLVE = "solve"
    HASH = "hash"


@dataclass
class _Fork:
    """A private chain in progress.

    For fork-and-steal the private blocks carry the attacker's own solution
    and then the stolen one; for ignore-and-fork they carry the attacker's
    solution and then a fresh one built on it.
    """
    kind: StrategyProfile
    base: float
    first: float
    second: float | None
    honest_first: float
    secret: int = 0


class BehavioralMiningEngine:
    def __init__(self, config: SimConfig, streams: SimStreams):
        self.config = config
        self.rng = streams.events
        self.ties = streams.ties
        self.ledger = BatchLedger(config.rounds, config.batches)
        self.s = (config.s.s1, config.s.s2)
        self.p = (config.params.p1, config.params.p2)
        self.q = (config.params.q1, config.params.q2)
        self.selfish = None if config.profile.selfish_miner is None else config.profile.selfish_miner - 1

        self.bench = 0.0
        self.held: list[float | None] = [None, None]
        self.carry = 0
        self.after_fork = False
        self.fork: _Fork | None = None
        self.now = 0

    # state inspection

    def label(self) -> int:
        if self.fork is not None:
            return self._fork_label()
        key = (self.carry, self.held[0] is not None, self.held[1] is not None)
        if key == (0, False, False):
            return 0
        if self.after_fork:
            return _AFTER_FORK_LABELS.get(key, OVERFLOW)
        return _HONEST_LABELS.get(key, OVERFLOW)

    def _fork_label(self) -> int:
        fork = self.fork
        if fork.kind is StrategyProfile.FSH:
            return 10 + 2 * fork.secret + (self.held[1] is not None)
        honest_holds = self.held[0] is not None
        if fork.secret == 0:
            return 17 if honest_holds else 14
        return {
            (False, False): 15,
            (True, False): 16,
            (False, True): 18,
            (True, True): 19,
        }[(fork.second is not None, honest_holds)]

    def _activity(self, miner: int) -> tuple[Event, float]:
        """The event a miner works toward this round and its hit probability."""
        fork = self.fork
        if fork is not None and miner == self.selfish:
            if fork.kind is StrategyProfile.HIF and fork.secret == 1 and fork.second is None:
                return Event.SOLVE, self.p[miner]
            return Event.HASH, self.q[miner]
        if self.held[miner] is None:
            return Event.SOLVE, self.p[miner]
        return Event.HASH, self.q[miner]

    # bookkeeping

    def _credit(self, miner: int, improvements: list[float]) -> None:
        amount = sum(float(evaluate(self.config.reward, x)) for x in improvements)
        self.ledger.credit(self.now, miner, amount, len(improvements))

    def _settle(self) -> None:
        if self.held[0] is None and self.held[1] is None:
            self.carry = 0
            self.after_fork = False
            self.held = [None, None]
            # Rebase so positions stay small over long runs.
            self.bench = 0.0

    # honest protocol

    def _solve(self, miner: int) -> None:
        if self.fork is not None and miner == self.selfish:
            self.fork.second = self.fork.first + self.s[miner]
            return
        self.held[miner] = self.bench + self.s[miner]

    def _publish(self, miner: int) -> None:
        if self.fork is not None:
            self._fork_block(miner)
            return
        other = 1 - miner
        solution = self.held[miner]
        previous = self.bench
        if self._starts_fork(miner, other, solution):
            self._open_fork(miner, other, solution, previous)
            return

        self._credit(miner, [solution - previous])
        self.bench = solution
        self.held[miner] = None
        survivor = self.held[other]
        if survivor is not None and survivor > self.bench + _EPS:
            self.carry += 1
            if self.config.truncate_at_state9 and self.carry > MAX_CARRY_OVERS:
                self.held[other] = None
        else:
            self.held[other] = None
        self._settle()

    def _starts_fork(self, miner: int, other: int, solution: float) -> bool:
        if other != self.selfish or self.carry != 0 or self.held[other] is None:
            return False
        if self.config.profile is StrategyProfile.FSH:
            return self.held[other] < solution
        return self.held[other] > solution

    def _open_fork(self, miner: int, other: int, solution: float, previous: float) -> None:
        kind = self.config.profile
        if kind is StrategyProfile.FSH:
            # Mine the own solution first, then the one just published.
            self.fork = _Fork(kind, base=previous, first=self.held[other], second=solution,
                              honest_first=solution - previous)
        else:
            self.fork = _Fork(kind, base=previous, first=self.held[other], second=None,
                              honest_first=solution - previous)
        self.ledger.forks_attempted += 1
        self.bench = solution
        self.held[miner] = None

    # private chains

    def _fork_block(self, miner: int) -> None:
        fork = self.fork
        if miner == self.selfish:
            if fork.secret == 0:
                fork.secret = 1
                return
            self._fork_succeeds()
        else:
            self._fork_fails(miner)

    def _fork_succeeds(self) -> None:
        fork, attacker = self.fork, self.selfish
        honest = 1 - attacker
        self._credit(attacker, [fork.first - fork.base, fork.second - fork.first])
        self.ledger.forks_succeeded += 1
        self.bench = fork.second
        self.fork = None
        self.held[attacker] = None
        if fork.kind is StrategyProfile.FSH:
            # The honest miner drops its pending solution.
            self.held[honest] = None
        elif self.held[honest] is not None and self.held[honest] <= self.bench + _EPS:
            self.held[honest] = None
        if self.held[honest] is not None:
            self.carry = 1
        self._settle()

    def _fork_fails(self, honest: int) -> None:
        fork, attacker = self.fork, self.selfish
        second = self.held[honest]
        self._credit(honest, [fork.honest_first, second - self.bench])
        self.bench = second
        self.held[honest] = None
        self.fork = None

        survivor = fork.second if fork.kind is not StrategyProfile.FSH and fork.secret == 1 else None
        if survivor is not None and survivor > self.bench + _EPS:
            self.held[attacker] = survivor
            self.carry = MAX_CARRY_OVERS
            self.after_fork = True
        else:
            self.held[attacker] = None
        self._settle()

    # main loop

    def _winner(self, contenders: list[int]) -> int:
        rule = self.config.tie_rule
        if rule is TieRule.PARTY1:
            return 0
        if rule is TieRule.PARTY2:
            return 1
        return int(self.ties.integers(0, 2))

    def run(self) -> SimResult:
        rounds = self.config.rounds
        while self.now < rounds:
            (event1, r1), (event2, r2) = self._activity(0), self._activity(1)
            fire_prob = 1.0 - (1.0 - r1) * (1.0 - r2)
            label = self.label()
            if fire_prob <= 0:
                self.ledger.occupy(label, self.now, rounds)
                break
            fire = self.now + int(self.rng.geometric(fire_prob)) - 1
            if fire >= rounds:
                self.ledger.occupy(label, self.now, rounds)
                break
            self.ledger.occupy(label, self.now, fire + 1)
            self.now = fire

            u = self.rng.random() * fire_prob
            if u < r1 * r2:
                fired = [0, 1]
            elif u < r1 * r2 + r1 * (1.0 - r2):
                fired = [0]
            else:
                fired = [1]
            events = {0: event1, 1: event2}

            for miner in fired:
                if events[miner] is Event.SOLVE:
                    self._solve(miner)
            publishers = [m for m in fired if events[m] is Event.HASH]
            if publishers:
                self._publish(publishers[0] if len(publishers) == 1 else self._winner(publishers))
            self.now = fire + 1

        logger.debug("behavioral %s finished %d rounds", self.config.profile.value, rounds)
        return self.ledger.result(self.config.profile.value, self.config.mode.value, self.config.seed)


def run_behavioral(config: SimConfig, streams: SimStreams) -> SimResult:
    return BehavioralMiningEngine(config, streams).run()
