# config.py
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from analysis.chains import StrategyProfile
from analysis.errors import DomainError
from analysis.params import ImprovementPair, NetworkParams
from analysis.rewards import RewardFunction

from .rng import SEED_MASK


class SimMode(str, Enum):
    CHAIN_EXACT = "chain_exact"
    BEHAVIORAL = "behavioral"


class TieRule(str, Enum):
    """Who wins when both parties complete a block in the same round."""
    COIN = "coin"
    PARTY1 = "party1"
    PARTY2 = "party2"


@dataclass(frozen=True)
class SimConfig:
    """One mining simulation run.

    ``truncate_at_state9`` only affects behavioral runs; chain-exact runs
    always follow the truncated analytic chain.
    """
    profile: StrategyProfile
    params: NetworkParams
    reward: RewardFunction
    s: ImprovementPair
    rounds: int
    seed: int = 0
    mode: SimMode = SimMode.CHAIN_EXACT
    truncate_at_state9: bool = True
    tie_rule: TieRule = TieRule.COIN
    batches: int = 50

    def __post_init__(self):
        object.__setattr__(self, "profile", StrategyProfile(self.profile))
        object.__setattr__(self, "mode", SimMode(self.mode))
        object.__setattr__(self, "tie_rule", TieRule(self.tie_rule))
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise DomainError(f"rounds must be a positive integer, got {self.rounds!r}", field="rounds")
        if not 0 <= self.seed <= SEED_MASK:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}", field="seed")
        if self.batches < 2:
            raise DomainError(f"batches must be at least 2, got {self.batches!r}", field="batches")
        if self.reward.s_m < self.s.s2 * (1 - 1e-9):
            raise DomainError(
                f"reward domain s_m = {self.reward.s_m} does not cover s2 = {self.s.s2}", field="s_m"
            )
