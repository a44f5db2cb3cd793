# rng.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimStreams:
    # Which event fires and when
    events: np.random.Generator
    # Tie-breaking coin for simultaneous blocks
    ties: np.random.Generator


def derive_seed(seed: int, point_index: int) -> int:
    """Per-point seed of a sweep: the master seed xor the grid index."""
    return (int(seed) ^ int(point_index)) & SEED_MASK


def make_streams(seed: int) -> SimStreams:
    """
    Deterministically create the independent streams of one simulation run.

      seed
        ├── events
        └── ties
    """
    root = np.random.SeedSequence(int(seed) & SEED_MASK)
    ss_events, ss_ties = root.spawn(2)
    return SimStreams(
        events=np.random.default_rng(ss_events),
        ties=np.random.default_rng(ss_ties),
    )


def make_generator(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & SEED_MASK))
