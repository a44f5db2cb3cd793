"""
Analytical model of optimization-based proof of useful work: network
parameters, reward functions, strategy-profile Markov chains and the
security conditions against selfish and malicious miners.
"""

from .errors import (
    PoUWError,
    DomainError,
    ApproximationError,
    DegenerateError,
    NotApplicableError
)
from .params import (
    NetworkParams,
    ImprovementPair,
    make_params,
    params_for_eta,
    difficulty_to_q0,
    estimate_convergence_order
)
from .chains import (
    StrategyProfile,
    Rate,
    Argument,
    RewardTerm,
    Transition,
    ChainSpec,
    SecurityCoefficients,
    build_chain,
    profile_states,
    relative_values,
    steady_state,
    transition_matrix,
    stationary_by_solve,
    coefficient_arrays,
    security_coefficients
)
from .rewards import (
    RewardKind,
    RewardFunction,
    RewardVerdict,
    SlopeVerdict,
    PropertyReport,
    evaluate,
    decompose,
    example_rewards,
    binding_ratio,
    dominant_issue,
    compute_mu,
    check_reward_principle,
    check_linear_slope,
    max_linear_slope,
    check_basic_properties
)
from .security import (
    SelfishVerdict,
    SecureRegion,
    payoff,
    payoff_from_events,
    condition_margins,
    check_selfish_security,
    selfish_security_at,
    mirrored_coefficients,
    check_necessary_conditions,
    lambda_grid,
    grid_margins,
    selfish_boundary,
    secure_region,
    fs_advantage,
    minimum_secure_eta,
    check_fs_advantage_monotone
)
from .malice import (
    RaceVariables,
    race_variables,
    longrange_necessary_bound,
    longrange_success_prob,
    race_win_prob,
    honest_race_prob,
    honest_wins_prob,
    check_malice_security,
    approx_malice_margin,
    approx_malice_condition,
    malice_boundary,
    approx_malice_boundary,
    minimum_eta_for_malice
)

__all__ = [
    # Errors
    'PoUWError',
    'DomainError',
    'ApproximationError',
    'DegenerateError',
    'NotApplicableError',

    # Parameters
    'NetworkParams',
    'ImprovementPair',
    'make_params',
    'params_for_eta',
    'difficulty_to_q0',
    'estimate_convergence_order',

    # Chains
    'StrategyProfile',
    'Rate',
    'Argument',
    'RewardTerm',
    'Transition',
    'ChainSpec',
    'SecurityCoefficients',
    'build_chain',
    'profile_states',
    'relative_values',
    'steady_state',
    'transition_matrix',
    'stationary_by_solve',
    'coefficient_arrays',
    'security_coefficients',

    # Rewards
    'RewardKind',
    'RewardFunction',
    'RewardVerdict',
    'SlopeVerdict',
    'PropertyReport',
    'evaluate',
    'decompose',
    'example_rewards',
    'binding_ratio',
    'dominant_issue',
    'compute_mu',
    'check_reward_principle',
    'check_linear_slope',
    'max_linear_slope',
    'check_basic_properties',

    # Selfish mining
    'SelfishVerdict',
    'SecureRegion',
    'payoff',
    'payoff_from_events',
    'condition_margins',
    'check_selfish_security',
    'selfish_security_at',
    'mirrored_coefficients',
    'check_necessary_conditions',
    'lambda_grid',
    'grid_margins',
    'selfish_boundary',
    'secure_region',
    'fs_advantage',
    'minimum_secure_eta',
    'check_fs_advantage_monotone',

    # Malicious miners
    'RaceVariables',
    'race_variables',
    'longrange_necessary_bound',
    'longrange_success_prob',
    'race_win_prob',
    'honest_race_prob',
    'honest_wins_prob',
    'check_malice_security',
    'approx_malice_margin',
    'approx_malice_condition',
    'malice_boundary',
    'approx_malice_boundary',
    'minimum_eta_for_malice'
]
