"""Monte-Carlo oracles for the mining chains and the long-range race."""

from .config import SimConfig, SimMode, TieRule
from .longrange import LongRangeResult, run_longrange_sim, run_random_walk_sim
from .results import SimResult
from .rng import derive_seed, make_streams
from .runner import run_mining_sim

__all__ = [
    # Mining runs
    "SimConfig",
    "SimMode",
    "TieRule",
    "SimResult",
    "run_mining_sim",
    # Long-range attacks
    "LongRangeResult",
    "run_longrange_sim",
    "run_random_walk_sim",
    # Seeding
    "derive_seed",
    "make_streams",
]
