# params.py
"""
Network-level parameters of the two-party mining model.

Every round the whole network finds a better solution with probability p0
and a valid nonce with probability q0; party i owns a share lambda_i of the
computing power and sees p_i = lambda_i * p0, q_i = lambda_i * q0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ApproximationError, DegenerateError, DomainError

# q_total * T / 2^L only approximates the exact Bernoulli complement when T/2^L << 1.
TARGET_RATIO_CAP = 0.01

EtaMode = Literal["fix-q0", "fix-sum"]


def _check_probability(name: str, value: float, *, upper_open: bool = True) -> None:
    upper_ok = value < 1 if upper_open else value <= 1
    if not (math.isfinite(value) and value >= 0 and upper_ok):
        bound = "[0, 1)" if upper_open else "[0, 1]"
        raise DomainError(f"{name} must lie in {bound}, got {value!r}", field=name)


@dataclass(frozen=True)
class NetworkParams:
    """Round-level probabilities and the power split of the two parties."""
    p0: float
    q0: float
    lambda1: float
    lambda2: float
    p1: float
    p2: float
    q1: float
    q2: float
    eta: float

    def with_lambda(self, lambda1: float) -> NetworkParams:
        return make_params(lambda1, self.p0, self.q0)

    @property
    def rates(self) -> tuple[float, float, float, float]:
        """(p1, p2, q1, q2) in the order the chain formulas use."""
        return self.p1, self.p2, self.q1, self.q2


@dataclass(frozen=True)
class ImprovementPair:
    """Per-solution objective improvements of the two parties, s1 < s2 < 2*s1."""
    s1: float
    s2: float

    def __post_init__(self):
        if not (math.isfinite(self.s1) and self.s1 > 0):
            raise DomainError(f"s1 must be positive, got {self.s1!r}", field="s1")
        if not (math.isfinite(self.s2) and self.s2 > 0):
            raise DomainError(f"s2 must be positive, got {self.s2!r}", field="s2")
        if not self.s1 < self.s2 < 2 * self.s1:
            raise DomainError(
                f"improvements must satisfy s1 < s2 < 2*s1, got s1={self.s1}, s2={self.s2}",
                field="s2",
            )

    @property
    def ratio(self) -> float:
        return self.s2 / self.s1

    @property
    def max_argument(self) -> float:
        # Largest reward argument any profile produces.
        return self.s2


def make_params(lambda1: float, p0: float, q0: float) -> NetworkParams:
    """Derive the per-party probabilities and the security overhead ratio.

    Args:
        lambda1: Computing-power share of party 1, in [0, 1].
        p0: Network-wide probability of a better solution per round.
        q0: Network-wide probability of a valid nonce per round.

    Returns:
        A fully derived, immutable NetworkParams.

    Raises:
        DomainError: If any input is out of range; ``field`` names it.
    """
    if not (math.isfinite(lambda1) and 0 <= lambda1 <= 1):
        raise DomainError(f"lambda1 must lie in [0, 1], got {lambda1!r}", field="lambda1")
    _check_probability("p0", p0)
    _check_probability("q0", q0)
    if p0 + q0 <= 0:
        raise DomainError("p0 + q0 must be positive", field="p0")

    lambda2 = 1.0 - lambda1
    return NetworkParams(
        p0=p0,
        q0=q0,
        lambda1=lambda1,
        lambda2=lambda2,
        p1=lambda1 * p0,
        p2=lambda2 * p0,
        q1=lambda1 * q0,
        q2=lambda2 * q0,
        eta=p0 / (p0 + q0),
    )


def params_for_eta(
    eta: float,
    lambda1: float,
    mode: EtaMode = "fix-sum",
    q0: float = 0.001,
    budget: float = 0.006,
) -> NetworkParams:
    """Build parameters at a given security overhead ratio.

    ``fix-q0`` keeps q0 and solves p0 = eta*q0/(1-eta); ``fix-sum`` keeps
    p0 + q0 equal to ``budget``.
    """
    if not (math.isfinite(eta) and 0 < eta < 1):
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}", field="eta")
    if mode == "fix-q0":
        p0 = eta * q0 / (1.0 - eta)
    elif mode == "fix-sum":
        p0, q0 = eta * budget, (1.0 - eta) * budget
    else:
        raise DomainError(f"unknown eta mode {mode!r}", field="mode")
    return make_params(lambda1, p0, q0)


def difficulty_to_q0(q_total: float, target_ratio: float) -> float:
    """Approximate the per-round nonce probability as q_total * T / 2^L."""
    if q_total < 0:
        raise DomainError(f"q_total must be non-negative, got {q_total!r}", field="q_total")
    if target_ratio < 0:
        raise DomainError(
            f"target_ratio must be non-negative, got {target_ratio!r}", field="target_ratio"
        )
    if target_ratio > TARGET_RATIO_CAP:
        raise ApproximationError(
            f"target_ratio {target_ratio} exceeds {TARGET_RATIO_CAP}; "
            "the linear approximation of the nonce probability no longer holds",
            field="target_ratio",
        )
    q0 = q_total * target_ratio
    return min(q0, float(np.nextafter(1.0, 0.0)))


def estimate_convergence_order(y3: float, y2: float, y1: float, y0: float) -> float:
    """Order of convergence from four consecutive objective values (newest first)."""
    d3, d2, d1 = y3 - y2, y2 - y1, y1 - y0
    if min(d3, d2, d1) <= 0:
        raise DegenerateError(
            "objective values must improve strictly between consecutive solutions"
        )
    denominator = math.log(d2 / d1)
    if denominator == 0:
        raise DegenerateError("successive improvement ratio is exactly 1; order is undefined")
    return math.log(d3 / d2) / denominator
