# rewards.py
"""
Block-reward functions R(s) and the design rules that keep selfish
strategies unprofitable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from utils.logger import get_logger

from .chains import SecurityCoefficients
from .errors import DegenerateError, DomainError, NotApplicableError

logger = get_logger(__name__)

# Arguments a hair above s_m come from float arithmetic on improvements.
_DOMAIN_SLACK = 1e-9


class RewardKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    POWER = "power"
    CUSTOM_TABLE = "table"


@dataclass(frozen=True)
class RewardFunction:
    """R(s) on [0, s_m]: constant b, linear k*s + b, power c*s^e + b, or a knot table."""
    kind: RewardKind
    s_m: float
    b: float = 1.0
    k: float = 0.0
    c: float = 0.0
    e: float = 1.0
    table: tuple[tuple[float, float], ...] = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", RewardKind(self.kind))
        if not (math.isfinite(self.s_m) and self.s_m > 0):
            raise DomainError(f"s_m must be positive, got {self.s_m!r}", field="s_m")
        if self.kind is RewardKind.CUSTOM_TABLE:
            self._validate_table()
            return
        if not self.b > 0:
            raise DomainError(f"intercept b must be positive, got {self.b!r}", field="b")
        if self.kind is RewardKind.LINEAR and self.k < 0:
            raise DomainError(f"slope k must be non-negative, got {self.k!r}", field="k")
        if self.kind is RewardKind.POWER:
            if self.c < 0:
                raise DomainError(f"coefficient c must be non-negative, got {self.c!r}", field="c")
            if not 0 < self.e <= 1:
                raise DomainError(f"exponent e must lie in (0, 1], got {self.e!r}", field="e")

    def _validate_table(self) -> None:
        if len(self.table) < 2:
            raise DomainError("a reward table needs at least two knots", field="table")
        s_values = np.array([p[0] for p in self.table], dtype=float)
        r_values = np.array([p[1] for p in self.table], dtype=float)
        if s_values[0] != 0:
            raise DomainError("the first knot of a reward table must sit at s = 0", field="table")
        if np.any(np.diff(s_values) <= 0):
            raise DomainError("reward table s values must be strictly increasing", field="table")
        if s_values[-1] < self.s_m:
            raise DomainError(
                f"reward table ends at {s_values[-1]}, before s_m = {self.s_m}", field="table"
            )
        if np.any(r_values <= 0):
            raise DomainError("reward table values must be positive", field="table")

    @classmethod
    def constant(cls, b: float, s_m: float, label: str = "") -> RewardFunction:
        return cls(RewardKind.CONSTANT, s_m=s_m, b=b, label=label)

    @classmethod
    def linear(cls, k: float, b: float, s_m: float, label: str = "") -> RewardFunction:
        return cls(RewardKind.LINEAR, s_m=s_m, b=b, k=k, label=label)

    @classmethod
    def power(cls, c: float, e: float, b: float, s_m: float, label: str = "") -> RewardFunction:
        return cls(RewardKind.POWER, s_m=s_m, b=b, c=c, e=e, label=label)

    @classmethod
    def from_table(
        cls, points: Sequence[Sequence[float]], s_m: float | None = None, label: str = ""
    ) -> RewardFunction:
        knots = tuple((float(s), float(r)) for s, r in points)
        if s_m is None:
            s_m = knots[-1][0] if knots else 0.0
        return cls(RewardKind.CUSTOM_TABLE, s_m=s_m, table=knots, label=label)

    @property
    def intercept(self) -> float:
        return float(evaluate(self, 0.0))

    def __call__(self, s: ArrayLike):
        return evaluate(self, s)


def evaluate(R: RewardFunction, s: ArrayLike):
    """R(s) for a scalar or an array of improvements in [0, s_m].

    Raises:
        DomainError: If any s lies outside [0, s_m].
    """
    values = np.asarray(s, dtype=float)
    if np.any(values < -_DOMAIN_SLACK * R.s_m) or np.any(values > R.s_m * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"improvement outside [0, {R.s_m}]: {s!r}", field="s")
    values = np.clip(values, 0.0, R.s_m)

    if R.kind is RewardKind.CONSTANT:
        out = np.full_like(values, R.b)
    elif R.kind is RewardKind.LINEAR:
        out = R.k * values + R.b
    elif R.kind is RewardKind.POWER:
        out = R.c * np.power(values, R.e) + R.b
    else:
        knots = np.array(R.table, dtype=float)
        out = np.interp(values, knots[:, 0], knots[:, 1])
    return float(out) if out.ndim == 0 else out


def decompose(R: RewardFunction, s: ArrayLike) -> tuple[float, np.ndarray | float]:
    """Split R(s) = R0 + R~(s) into the base reward and the useful-work bonus."""
    base = R.intercept
    return base, evaluate(R, s) - base


def example_rewards(s_m: float) -> dict[str, RewardFunction]:
    """The five reference curves, from flat to steep."""
    return {
        "R1": RewardFunction.constant(1.0, s_m, label="R1"),
        "R2": RewardFunction.linear(1.0, 1.0, s_m, label="R2"),
        "R3": RewardFunction.power(1.2, 0.5, 1.0, s_m, label="R3"),
        "R4": RewardFunction.power(1.5, 0.5, 1.0, s_m, label="R4"),
        "R5": RewardFunction.linear(2.0, 1.0, s_m, label="R5"),
    }


@dataclass(frozen=True)
class PropertyReport:
    positive: bool
    monotone: bool
    concave: bool


def check_basic_properties(R: RewardFunction, grid: int = 1000) -> PropertyReport:
    """Positivity, monotonicity and concavity of R sampled on an even grid."""
    if grid < 3:
        raise DomainError(f"grid must hold at least 3 points, got {grid}", field="grid")
    s = np.linspace(0.0, R.s_m, grid)
    values = np.asarray(evaluate(R, s))
    tolerance = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    return PropertyReport(
        positive=bool(np.all(values[1:] > 0)),
        monotone=bool(np.all(np.diff(values) >= -tolerance)),
        concave=bool(np.all(np.diff(values, n=2) <= tolerance)),
    )


def _check_denominators(coeffs: SecurityCoefficients) -> None:
    if not coeffs.beta1 > 0:
        raise DegenerateError(f"beta1 must be positive, got {coeffs.beta1!r}")
    if coeffs.beta2 + coeffs.gamma2 == 0:
        raise DegenerateError("beta2 + gamma2 = 0; the chain-formation ratio is undefined")


def _ratios(coeffs: SecurityCoefficients) -> tuple[float, float]:
    _check_denominators(coeffs)
    plagiarism = (coeffs.gamma1 - coeffs.alpha1) / coeffs.beta1
    chain_formation = -coeffs.alpha2 / (coeffs.beta2 + coeffs.gamma2)
    return plagiarism, chain_formation


def binding_ratio(coeffs: SecurityCoefficients) -> float:
    """max{(gamma1 - alpha1)/beta1, -alpha2/(beta2 + gamma2)}."""
    return max(_ratios(coeffs))


def dominant_issue(coeffs: SecurityCoefficients) -> str:
    """Which attack sets the binding ratio: stealing a solution or forming a private chain."""
    plagiarism, chain_formation = _ratios(coeffs)
    return "plagiarism" if plagiarism >= chain_formation else "chain-formation"


def compute_mu(coeffs: SecurityCoefficients) -> float:
    """Upper bound on R(s)/R(0) that still deters both selfish strategies."""
    ratio = binding_ratio(coeffs)
    if coeffs.alpha1 >= coeffs.gamma1 and coeffs.alpha2 >= 0:
        return math.inf
    return 1.0 / ratio if ratio > 0 else math.inf


@dataclass(frozen=True)
class RewardVerdict:
    principle_holds: bool
    binding_ratio: float
    mu: float
    worst_s: float
    concave: bool
    necessary_only: bool
    dominant_issue: str


def check_reward_principle(
    R: RewardFunction, coeffs: SecurityCoefficients, s_grid_resolution: int = 1000
) -> RewardVerdict:
    """Check R(0) > binding_ratio * R(s) for every s in (0, s_m].

    Args:
        R: Reward function under test.
        coeffs: Coefficients at the parameter point; need eta > 1/2.
        s_grid_resolution: Number of grid points on (0, s_m].

    Returns:
        The verdict; ``necessary_only`` is set when R is not concave, since the
        equivalence with the equilibrium conditions then no longer holds.

    Raises:
        NotApplicableError: If coeffs.eta <= 1/2.
        DegenerateError: If beta1 <= 0 or beta2 + gamma2 = 0.
    """
    if coeffs.eta <= 0.5:
        raise NotApplicableError(
            f"the reward design principle assumes eta > 1/2, got eta = {coeffs.eta:.6g}"
        )
    ratio = binding_ratio(coeffs)
    s = np.linspace(0.0, R.s_m, s_grid_resolution + 1)[1:]
    values = np.asarray(evaluate(R, s))
    base = R.intercept
    worst = int(np.argmax(values * ratio / base))

    properties = check_basic_properties(R, s_grid_resolution)
    if not properties.concave:
        logger.warning("reward %s is not concave; the principle is a necessary condition only", R.label or R.kind.value)

    return RewardVerdict(
        principle_holds=bool(base > ratio * float(values.max())),
        binding_ratio=ratio,
        mu=compute_mu(coeffs),
        worst_s=float(s[worst]),
        concave=properties.concave,
        necessary_only=not properties.concave,
        dominant_issue=dominant_issue(coeffs),
    )


def max_linear_slope(b: float, s_m: float, mu: float) -> float:
    """Largest admissible slope (mu - 1) * b / s_m of a linear reward."""
    return math.inf if math.isinf(mu) else (mu - 1.0) * b / s_m


@dataclass(frozen=True)
class SlopeVerdict:
    sufficient: bool
    necessary_violated: bool
    max_slope: float

    def __bool__(self) -> bool:
        return self.sufficient


def check_linear_slope(k: float, b: float, s_m: float, mu: float) -> SlopeVerdict:
    """Sufficient condition 0 <= k < (mu - 1) * b / s_m for a linear reward k*s + b."""
    if not b > 0:
        raise DomainError(f"intercept b must be positive, got {b!r}", field="b")
    if not s_m > 0:
        raise DomainError(f"s_m must be positive, got {s_m!r}", field="s_m")
    if mu <= 1:
        return SlopeVerdict(sufficient=False, necessary_violated=True, max_slope=0.0)
    limit = max_linear_slope(b, s_m, mu)
    return SlopeVerdict(sufficient=bool(0 <= k < limit), necessary_violated=False, max_slope=limit)
