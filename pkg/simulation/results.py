# results.py
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SimResult:
    """Totals and batch-means standard errors of one mining run; miners are indexed 0 and 1."""
    profile: str
    mode: str
    rounds: int
    seed_used: int
    total_reward: tuple[float, float]
    reward_per_round: tuple[float, float]
    reward_stderr: tuple[float, float]
    blocks_mined: tuple[int, int]
    forks_attempted: int
    forks_succeeded: int
    occupancy: dict[int, float]
    occupancy_stderr: dict[int, float]


class BatchLedger:
    """Accumulates rewards and state occupancy into equal consecutive round batches."""

    def __init__(self, rounds: int, batches: int):
        self.rounds = rounds
        self.batches = min(batches, rounds)
        self.edges = np.array([(i * rounds) // self.batches for i in range(self.batches + 1)])
        self.lengths = np.diff(self.edges).astype(float)
        self.rewards = np.zeros((self.batches, 2))
        self.occupancy: dict[int, np.ndarray] = defaultdict(lambda: np.zeros(self.batches))
        self.blocks = [0, 0]
        self.forks_attempted = 0
        self.forks_succeeded = 0

    def _batch(self, round_index: int) -> int:
        return int(np.searchsorted(self.edges, round_index, side="right")) - 1

    def credit(self, round_index: int, miner: int, amount: float, blocks: int = 1) -> None:
        self.rewards[self._batch(round_index), miner] += amount
        self.blocks[miner] += blocks

    def occupy(self, label: int, start: int, stop: int) -> None:
        """Count rounds start..stop-1 as spent in ``label``."""
        counts = self.occupancy[label]
        batch = self._batch(start)
        while start < stop:
            end = min(stop, int(self.edges[batch + 1]))
            counts[batch] += end - start
            start, batch = end, batch + 1

    def _stderr(self, per_batch: np.ndarray) -> float:
        means = per_batch / self.lengths
        if self.batches < 2:
            return float("nan")
        return float(np.std(means, ddof=1) / np.sqrt(self.batches))

    def result(self, profile: str, mode: str, seed: int) -> SimResult:
        totals = self.rewards.sum(axis=0)
        labels = sorted(self.occupancy)
        return SimResult(
            profile=profile,
            mode=mode,
            rounds=self.rounds,
            seed_used=seed,
            total_reward=(float(totals[0]), float(totals[1])),
            reward_per_round=(float(totals[0] / self.rounds), float(totals[1] / self.rounds)),
            reward_stderr=(self._stderr(self.rewards[:, 0]), self._stderr(self.rewards[:, 1])),
            blocks_mined=(self.blocks[0], self.blocks[1]),
            forks_attempted=self.forks_attempted,
            forks_succeeded=self.forks_succeeded,
            occupancy={label: float(self.occupancy[label].sum() / self.rounds) for label in labels},
            occupancy_stderr={label: self._stderr(self.occupancy[label]) for label in labels},
        )
