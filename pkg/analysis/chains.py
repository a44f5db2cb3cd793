# chains.py
"""
Markov chains of the two-party mining process under the three strategy
profiles, their closed-form relative values and stationary distributions.

State 0 is consensus: both parties solve on the same benchmark. States 1-9
describe honest competition (HH); states 10-13 are the fork-and-steal
attempt of party 1 (FSH); states 14-21 the ignore-and-fork attempt of
party 2 (HIF). Every state keeps a self-loop carrying the residual
probability of a round in which nothing happens.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DegenerateError
from .params import ImprovementPair, NetworkParams


class StrategyProfile(str, Enum):
    HH = "HH"
    FSH = "FSH"
    HIF = "HIF"

    @property
    def selfish_miner(self) -> int | None:
        return {StrategyProfile.FSH: 1, StrategyProfile.HIF: 2}.get(self)


class Rate(str, Enum):
    """Per-round event probability that triggers a transition."""
    P1 = "p1"
    P2 = "p2"
    Q1 = "q1"
    Q2 = "q2"

    def of(self, params: NetworkParams) -> float:
        return getattr(params, self.value)


class Argument(str, Enum):
    """Block improvement credited by a reward, written in s1 and s2."""
    S1 = "s1"
    S2 = "s2"
    S2_MINUS_S1 = "s2-s1"
    TWO_S1_MINUS_S2 = "2s1-s2"
    TWO_S2_MINUS_TWO_S1 = "2s2-2s1"

    def of(self, s: ImprovementPair) -> float:
        return {
            Argument.S1: s.s1,
            Argument.S2: s.s2,
            Argument.S2_MINUS_S1: s.s2 - s.s1,
            Argument.TWO_S1_MINUS_S2: 2 * s.s1 - s.s2,
            Argument.TWO_S2_MINUS_TWO_S1: 2 * s.s2 - 2 * s.s1,
        }[self]


@dataclass(frozen=True)
class RewardTerm:
    miner: int
    argument: Argument
    count: int = 1


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    rate: Rate
    probability: float
    rewards: tuple[RewardTerm, ...] = ()
    fork_attempt: bool = False
    fork_success: bool = False


@dataclass(frozen=True)
class ChainSpec:
    """A concrete chain: states, outgoing transitions and reward annotations."""
    profile: StrategyProfile
    params: NetworkParams
    states: tuple[int, ...]
    transitions: tuple[Transition, ...]

    @property
    def index(self) -> dict[int, int]:
        return {state: i for i, state in enumerate(self.states)}

    @property
    def reward_events(self) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.rewards)

    def outgoing(self, state: int) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == state)

    def exit_probability(self, state: int) -> float:
        return sum(t.probability for t in self.outgoing(state))


# (source, target, rate, rewards, fork_attempt, fork_success)
_Edge = tuple[int, int, Rate, tuple[RewardTerm, ...], bool, bool]


def _edge(source, target, rate, *rewards, attempt=False, success=False) -> _Edge:
    return source, target, rate, tuple(rewards), attempt, success


_R = RewardTerm
_A = Argument
P1, P2, Q1, Q2 = Rate.P1, Rate.P2, Rate.Q1, Rate.Q2

_HH_EDGES: tuple[_Edge, ...] = (
    _edge(0, 2, P1),
    _edge(0, 1, P2),
    _edge(1, 3, P1),
    _edge(1, 0, Q2, _R(2, _A.S2)),
    _edge(2, 0, Q1, _R(1, _A.S1)),
    _edge(2, 3, P2),
    _edge(3, 4, Q1, _R(1, _A.S1)),
    _edge(3, 0, Q2, _R(2, _A.S2)),
    _edge(4, 5, P1),
    _edge(4, 0, Q2, _R(2, _A.S2_MINUS_S1)),
    _edge(5, 0, Q1, _R(1, _A.S1)),
    _edge(5, 6, Q2, _R(2, _A.S2_MINUS_S1)),
    _edge(6, 0, Q1, _R(1, _A.TWO_S1_MINUS_S2)),
    _edge(6, 7, P2),
    _edge(7, 8, Q1, _R(1, _A.TWO_S1_MINUS_S2)),
    _edge(7, 0, Q2, _R(2, _A.S2)),
    _edge(8, 9, P1),
    _edge(8, 0, Q2, _R(2, _A.TWO_S2_MINUS_TWO_S1)),
    # State 9 only returns to state 0.
    _edge(9, 0, Q1, _R(1, _A.S1)),
    _edge(9, 0, Q2, _R(2, _A.TWO_S2_MINUS_TWO_S1)),
)

_FS_SUCCESS = (_R(1, _A.S1), _R(1, _A.S2_MINUS_S1))
_FS_FAILURE = (_R(2, _A.S2, 2),)

_FSH_EDGES: tuple[_Edge, ...] = tuple(
    e for e in _HH_EDGES if (e[0], e[2]) != (3, Q2)
) + (
    _edge(3, 10, Q2, attempt=True),
    _edge(10, 11, P2),
    _edge(10, 12, Q1),
    _edge(11, 13, Q1),
    _edge(11, 0, Q2, *_FS_FAILURE),
    _edge(12, 0, Q1, *_FS_SUCCESS, success=True),
    _edge(12, 13, P2),
    # State 13 only returns to state 0.
    _edge(13, 0, Q1, *_FS_SUCCESS, success=True),
    _edge(13, 0, Q2, *_FS_FAILURE),
)

_IF_SUCCESS = (_R(2, _A.S2, 2),)
_IF_FAILURE = (_R(1, _A.S1, 2),)

_HIF_EDGES: tuple[_Edge, ...] = tuple(
    e for e in _HH_EDGES if (e[0], e[2]) != (3, Q1)
) + (
    _edge(3, 14, Q1, attempt=True),
    _edge(14, 15, Q2),
    _edge(14, 17, P1),
    _edge(15, 16, P2),
    _edge(15, 18, P1),
    _edge(16, 0, Q2, *_IF_SUCCESS, success=True),
    _edge(16, 19, P1),
    _edge(17, 18, Q2),
    _edge(17, 0, Q1, *_IF_FAILURE),
    _edge(18, 19, P2),
    _edge(18, 0, Q1, *_IF_FAILURE),
    _edge(19, 0, Q2, *_IF_SUCCESS, success=True),
    # The attacker's second solution survives the failed fork.
    _edge(19, 20, Q1, *_IF_FAILURE),
    _edge(20, 0, Q2, _R(2, _A.TWO_S2_MINUS_TWO_S1)),
    _edge(20, 21, P1),
    _edge(21, 0, Q2, _R(2, _A.TWO_S2_MINUS_TWO_S1)),
    _edge(21, 0, Q1, _R(1, _A.S1)),
)

_EDGES = {
    StrategyProfile.HH: _HH_EDGES,
    StrategyProfile.FSH: _FSH_EDGES,
    StrategyProfile.HIF: _HIF_EDGES,
}

_STATES = {
    StrategyProfile.HH: tuple(range(10)),
    StrategyProfile.FSH: tuple(range(14)),
    StrategyProfile.HIF: tuple(range(10)) + tuple(range(14, 22)),
}

# States 4-9 cannot be entered once state 3's q1 exit leads into the fork.
_HIF_TRANSIENT = frozenset(range(4, 10))


def profile_states(profile: StrategyProfile) -> tuple[int, ...]:
    return _STATES[StrategyProfile(profile)]


def build_chain(profile: StrategyProfile, params: NetworkParams) -> ChainSpec:
    """Resolve the profile's transition table against concrete probabilities."""
    profile = StrategyProfile(profile)
    transitions = tuple(
        Transition(
            source=source,
            target=target,
            rate=rate,
            probability=rate.of(params),
            rewards=rewards,
            fork_attempt=attempt,
            fork_success=success,
        )
        for source, target, rate, rewards, attempt, success in _EDGES[profile]
    )
    chain = ChainSpec(profile=profile, params=params, states=_STATES[profile], transitions=transitions)
    for state in chain.states:
        if chain.exit_probability(state) > 1.0 + 1e-12:
            raise DegenerateError(f"outgoing probability of state {state} exceeds 1")
    return chain


def _raw_values(p1, p2, q1, q2) -> dict[int, np.ndarray]:
    """Closed-form relative values v0..v21 for scalars or same-shape arrays.

    v4..v9 are the honest-competition values; the HIF chain overrides them
    with zero.
    """
    p1, p2, q1, q2 = (np.asarray(x, dtype=float) for x in (p1, p2, q1, q2))
    denominators = {"q1+q2": q1 + q2, "p1+q2": p1 + q2, "q1+p2": q1 + p2, "p1+p2": p1 + p2}
    for name, d in denominators.items():
        if np.any(d <= 0):
            raise DegenerateError(f"relative values undefined: {name} = 0")
    qq, pq, qp, pp = denominators.values()

    v = {0: np.ones_like(p1)}
    v[1] = p2 / pq
    v[2] = p1 / qp
    v[3] = (p1 * v[1] + p2 * v[2]) / qq
    v[4] = q1 * v[3] / pq
    v[5] = p1 * v[4] / qq
    v[6] = q2 * v[5] / qp
    v[7] = p2 * v[6] / qq
    v[8] = q1 * v[7] / pq
    v[9] = p1 * v[8] / qq

    v[10] = q2 * v[3] / qp
    v[11] = p2 * v[10] / qq
    v[12] = q1 * v[10] / qp
    v[13] = (q1 * v[11] + p2 * v[12]) / qq

    v[14] = q1 * v[3] / pq
    v[15] = q2 * v[14] / pp
    v[16] = p2 * v[15] / pq
    v[17] = p1 * v[14] / qq
    v[18] = (p1 * v[15] + q2 * v[17]) / qp
    v[19] = (p1 * v[16] + p2 * v[18]) / qq
    v[20] = q1 * v[19] / pq
    v[21] = p1 * v[20] / qq
    return v


def relative_values(profile: StrategyProfile, params: NetworkParams) -> np.ndarray:
    """v_i = w_i / w_0 for the profile's states, ordered as profile_states(profile).

    Raises:
        DegenerateError: If a recursion denominator vanishes.
    """
    profile = StrategyProfile(profile)
    v = _raw_values(*params.rates)
    transient = _HIF_TRANSIENT if profile is StrategyProfile.HIF else frozenset()
    return np.array([0.0 if i in transient else float(v[i]) for i in _STATES[profile]])


def steady_state(chain: ChainSpec, params: NetworkParams | None = None) -> np.ndarray:
    """Stationary distribution over chain.states from the relative values."""
    v = relative_values(chain.profile, params or chain.params)
    return v / v.sum()


def transition_matrix(chain: ChainSpec) -> np.ndarray:
    """Dense row-stochastic matrix with the residual on the diagonal."""
    index = chain.index
    matrix = np.zeros((len(chain.states), len(chain.states)))
    for t in chain.transitions:
        matrix[index[t.source], index[t.target]] += t.probability
    matrix[np.diag_indices_from(matrix)] += 1.0 - matrix.sum(axis=1)
    return matrix


def stationary_by_solve(chain: ChainSpec) -> np.ndarray:
    """Stationary vector by Grassmann-Taksar-Heyman state reduction.

    The reduction only adds and divides non-negative numbers, so it keeps
    full relative accuracy on the small per-round probabilities used here.
    State 0 must be first in chain.states.
    """
    a = transition_matrix(chain)
    n_states = a.shape[0]
    for n in range(n_states - 1, 0, -1):
        outflow = a[n, :n].sum()
        if outflow <= 0:
            raise DegenerateError(f"state {chain.states[n]} cannot reach lower states")
        a[:n, n] /= outflow
        a[:n, :n] += np.outer(a[:n, n], a[n, :n])

    pi = np.zeros(n_states)
    pi[0] = 1.0
    for n in range(1, n_states):
        pi[n] = pi[:n] @ a[:n, n]
    return pi / pi.sum()


@dataclass(frozen=True)
class SecurityCoefficients:
    """Coefficients of the two equilibrium inequalities, plus the eta they came from."""
    alpha1: float
    beta1: float
    gamma1: float
    alpha2: float
    beta2: float
    gamma2: float
    eta: float

    def scaled(self, factor: float) -> SecurityCoefficients:
        return SecurityCoefficients(
            *(factor * x for x in (self.alpha1, self.beta1, self.gamma1, self.alpha2, self.beta2, self.gamma2)),
            eta=self.eta,
        )


def _sum(v: dict[int, np.ndarray], states: Iterable[int]) -> np.ndarray:
    return sum(v[i] for i in states)


def coefficient_arrays(p1, p2, q1, q2) -> tuple[np.ndarray, ...]:
    """(alpha1, beta1, gamma1, alpha2, beta2, gamma2), vectorized over the rates."""
    v = _raw_values(p1, p2, q1, q2)
    honest = _sum(v, range(10))
    fork_steal = _sum(v, range(10, 14))
    head = _sum(v, range(4))
    tail = _sum(v, range(4, 10))
    ignore_fork = _sum(v, range(14, 22))

    alpha1 = fork_steal * (v[2] + v[3] + v[5] + v[9]) - honest * (v[12] + v[13])
    beta1 = fork_steal * (v[6] + v[7])
    gamma1 = honest * (v[12] + v[13])

    alpha2 = (
        (ignore_fork - tail) * (v[1] + v[3])
        + (head + ignore_fork) * v[7]
        - 2 * honest * (v[16] + v[19])
    )
    beta2 = (head + ignore_fork) * (v[4] + v[5])
    gamma2 = (head + ignore_fork) * (v[8] + v[9]) - honest * (v[20] + v[21])
    return alpha1, beta1, gamma1, alpha2, beta2, gamma2


def security_coefficients(params: NetworkParams) -> SecurityCoefficients:
    """Coefficients of the FS and IF equilibrium conditions at one parameter point."""
    values = coefficient_arrays(*params.rates)
    return SecurityCoefficients(*(float(x) for x in values), eta=params.eta)


