# commands.py
"""
Back end of the four CLI subcommands. Each command computes every row
first and writes its files only at the end, so a failure leaves no output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from analysis.chains import StrategyProfile, security_coefficients
from analysis.errors import PoUWError
from analysis.malice import (
    approx_malice_boundary,
    approx_malice_margin,
    honest_race_prob,
    honest_wins_prob,
    longrange_necessary_bound,
    longrange_success_prob,
)
from analysis.params import ImprovementPair, NetworkParams, make_params, params_for_eta
from analysis.rewards import (
    RewardFunction,
    RewardKind,
    binding_ratio,
    check_linear_slope,
    check_reward_principle,
    compute_mu,
    dominant_issue,
)
from analysis.security import (
    check_necessary_conditions,
    check_selfish_security,
    mirrored_coefficients,
    payoff,
    secure_region,
    selfish_security_at,
)
from simulation.config import SimConfig
from simulation.longrange import run_longrange_sim
from simulation.rng import derive_seed
from simulation.runner import run_mining_sim
from utils.config import Settings, get_settings
from utils.logger import get_logger

from .config import ConfigError, ExperimentConfig, SimulationSection
from .output import sibling_path, write_record, write_rows

logger = get_logger(__name__)

NAN = math.nan

# Standard errors allowed between a simulated and an analytic reward rate.
Z_TOLERANCE = 3.0


def _jobs(config: ExperimentConfig, settings: Settings) -> int:
    return config.jobs if config.jobs is not None else settings.jobs


def _map(fn: Callable, tasks: Sequence, jobs: int) -> list:
    """Map in order; a pool is only started when it can help."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _optional(fn: Callable[[], Any], default: Any = NAN) -> Any:
    """Value of fn, or ``default`` where a result is undefined at this point."""
    try:
        return fn()
    except PoUWError as e:
        logger.debug("not applicable here: %s", e)
        return default


def _flag(value: Optional[bool]) -> Any:
    return NAN if value is None else int(bool(value))


# analyze

def analyze_point(params: NetworkParams, R: RewardFunction, s: ImprovementPair) -> dict[str, Any]:
    """Every analytic quantity and verdict at one parameter point."""
    coeffs = security_coefficients(params)
    verdict = check_selfish_security(params, R, s)
    necessary_fs, necessary_if = check_necessary_conditions(coeffs)
    principle = _optional(lambda: check_reward_principle(R, coeffs), None)
    mu = _optional(lambda: compute_mu(coeffs))
    p_h = _optional(lambda: honest_wins_prob(params))
    approx = _optional(lambda: approx_malice_margin(params.lambda1, params.eta))
    slope = None
    if R.kind is RewardKind.LINEAR and not math.isnan(mu):
        slope = check_linear_slope(R.k, R.b, R.s_m, mu)
    longrange_bound = longrange_necessary_bound(params.eta) if 0 < params.eta < 1 else NAN

    record: dict[str, Any] = {
        "p0": params.p0,
        "q0": params.q0,
        "lambda1": params.lambda1,
        "lambda2": params.lambda2,
        "eta": params.eta,
        "s1": s.s1,
        "s2": s.s2,
        "reward": R.label or R.kind.value,
        "alpha1": coeffs.alpha1,
        "beta1": coeffs.beta1,
        "gamma1": coeffs.gamma1,
        "alpha2": coeffs.alpha2,
        "beta2": coeffs.beta2,
        "gamma2": coeffs.gamma2,
    }
    for profile in StrategyProfile:
        for miner in (1, 2):
            record[f"payoff_{profile.value.lower()}_{miner}"] = payoff(profile, miner, params, R, s)
    record.update(
        {
            "fs_margin": verdict.fs_margin,
            "if_margin": verdict.if_margin,
            "fs_payoff_gap": verdict.fs_payoff_gap,
            "if_payoff_gap": verdict.if_payoff_gap,
            "binding_ratio": _optional(lambda: binding_ratio(coeffs)),
            "mu": mu,
            "dominant_issue": _optional(lambda: dominant_issue(coeffs), ""),
            "worst_s": principle.worst_s if principle else NAN,
            "max_linear_slope": slope.max_slope if slope is not None else NAN,
            "longrange_bound": longrange_bound,
            "honest_wins_prob": p_h,
            "approx_malice_margin": approx,
            "selfish_secure": _flag(verdict.secure),
            "selfish_secure_payoff": _flag(verdict.payoff_secure),
            "necessary_fs": _flag(necessary_fs),
            "necessary_if": _flag(necessary_if),
            "principle_holds": _flag(principle.principle_holds if principle else None),
            "principle_necessary_only": _flag(principle.necessary_only if principle else None),
            "linear_slope_ok": _flag(slope.sufficient if slope is not None else None),
            "longrange_bound_ok": _flag(params.lambda1 < longrange_bound if not math.isnan(longrange_bound) else None),
            "malice_secure": _flag(None if math.isnan(p_h) else p_h > 0.5),
            "approx_malice_secure": _flag(None if math.isnan(approx) else approx >= 0),
        }
    )
    return record


def cmd_analyze(config: ExperimentConfig, settings: Settings | None = None) -> list[Path]:
    s = config.improvement.build()
    R = config.reward.build(s)
    net = config.network
    record = analyze_point(make_params(net.lambda1, net.p0, net.q0), R, s)
    logger.info("analysis at lambda1=%.4f eta=%.4f done", net.lambda1, record["eta"])
    return [write_record(record, config.output.path, config.output.format)]


# simulate

@dataclass(frozen=True)
class _SimTask:
    config: SimConfig


def _simulate_one(task: _SimTask):
    return run_mining_sim(task.config)


def _sim_config(
    section: SimulationSection,
    profile: StrategyProfile,
    params: NetworkParams,
    R: RewardFunction,
    s: ImprovementPair,
    seed: int,
) -> SimConfig:
    return SimConfig(
        profile=profile,
        params=params,
        reward=R,
        s=s,
        rounds=section.rounds,
        seed=seed,
        mode=section.mode,
        truncate_at_state9=section.truncate_at_state9,
        tie_rule=section.tie_rule,
        batches=section.batches,
    )


def _within(mean: float, stderr: float, expected: float) -> bool:
    if stderr == 0 or math.isnan(stderr):
        return math.isclose(mean, expected, rel_tol=1e-9, abs_tol=1e-15)
    return abs(mean - expected) <= Z_TOLERANCE * stderr


def _longrange_rows(config: ExperimentConfig, params: NetworkParams, seed: int, jobs: int) -> list[dict[str, Any]]:
    section = config.longrange
    p_h = _optional(lambda: honest_race_prob(params))
    tasks = [
        (k, params, section.trials, derive_seed(seed, i), section.max_steps, section.abandon_tolerance)
        for i, k in enumerate(section.k)
    ]
    results = _map(_longrange_one, tasks, jobs)
    rows = []
    for (k, *_), result in zip(tasks, results):
        analytic = NAN if math.isnan(p_h) else _optional(lambda: longrange_success_prob(k, p_h))
        rows.append(
            {
                "k": k,
                "lambda1": params.lambda1,
                "eta": params.eta,
                "honest_wins_prob": p_h,
                "analytic_success": analytic,
                "sim_success_rate": result.success_rate,
                "sim_stderr": result.stderr,
                "sim_ci_low": result.ci_low,
                "sim_ci_high": result.ci_high,
                "sim_rate_low": result.rate_low,
                "sim_rate_high": result.rate_high,
                "successes": result.successes,
                "failures": result.failures,
                "abandoned": result.abandoned,
                "censored": result.censored,
                "trials": result.trials,
            }
        )
    return rows


def _longrange_one(task):
    k, params, trials, seed, max_steps, tolerance = task
    return run_longrange_sim(k, params, trials, seed=seed, max_steps=max_steps, abandon_tolerance=tolerance)


def cmd_simulate(config: ExperimentConfig, settings: Settings | None = None) -> list[Path]:
    """One row per (seed, profile) with the analytic payoffs beside the estimates."""
    settings = settings or get_settings()
    jobs = _jobs(config, settings)
    s = config.improvement.build()
    R = config.reward.build(s)
    net = config.network
    params = make_params(net.lambda1, net.p0, net.q0)
    seeds = config.seeds(settings.seed)

    analytic = {
        profile: (payoff(profile, 1, params, R, s), payoff(profile, 2, params, R, s))
        for profile in config.simulation.profiles
    }
    keys = [(seed, profile) for seed in seeds for profile in config.simulation.profiles]
    tasks = [_SimTask(_sim_config(config.simulation, profile, params, R, s, seed)) for seed, profile in keys]
    results = _map(_simulate_one, tasks, jobs)

    rows = []
    for (seed, profile), result in zip(keys, results):
        expected1, expected2 = analytic[profile]
        (mean1, mean2), (se1, se2) = result.reward_per_round, result.reward_stderr
        rows.append(
            {
                "seed": seed,
                "profile": profile.value,
                "lambda1": params.lambda1,
                "eta": params.eta,
                "analytic_reward1": expected1,
                "analytic_reward2": expected2,
                "sim_reward1_mean": mean1,
                "sim_reward1_stderr": se1,
                "sim_reward2_mean": mean2,
                "sim_reward2_stderr": se2,
                "sim_rounds": result.rounds,
                "blocks1": result.blocks_mined[0],
                "blocks2": result.blocks_mined[1],
                "forks_attempted": result.forks_attempted,
                "forks_succeeded": result.forks_succeeded,
                "within_tolerance1": _flag(_within(mean1, se1, expected1)),
                "within_tolerance2": _flag(_within(mean2, se2, expected2)),
            }
        )

    written = [write_rows(rows, config.output.path, config.output.format)]
    if config.longrange.enabled:
        longrange = _longrange_rows(config, params, derive_seed(seeds[0], len(keys)), jobs)
        written.append(
            write_rows(longrange, sibling_path(config.output.path, "longrange", config.output.format), config.output.format)
        )
    return written


# sweep

@dataclass(frozen=True)
class _SweepTask:
    index: int
    axes: dict[str, Any]
    reward: RewardFunction
    s: ImprovementPair
    lambda_s: float
    p0: float
    q0: float
    slope: Optional[float]
    simulation: Optional[SimulationSection]
    seed: int


def _sweep_point(task: _SweepTask) -> dict[str, Any]:
    R, s, lambda_s = task.reward, task.s, task.lambda_s
    fs_params = make_params(lambda_s, task.p0, task.q0)
    if_params = make_params(1.0 - lambda_s, task.p0, task.q0)
    eta = fs_params.eta

    honest_fs = payoff(StrategyProfile.HH, 1, fs_params, R, s)
    fs = payoff(StrategyProfile.FSH, 1, fs_params, R, s)
    honest_if = payoff(StrategyProfile.HH, 2, if_params, R, s)
    if_ = payoff(StrategyProfile.HIF, 2, if_params, R, s)
    verdict = selfish_security_at(lambda_s, task.p0, task.q0, R, s)
    coeffs = mirrored_coefficients(lambda_s, task.p0, task.q0)
    principle = _optional(lambda: check_reward_principle(R, coeffs), None)
    mu = _optional(lambda: compute_mu(coeffs))
    p_h = _optional(lambda: honest_wins_prob(fs_params)) if 0 < lambda_s < 1 else NAN
    slope_ok = None
    if task.slope is not None and not math.isnan(mu):
        slope_ok = check_linear_slope(task.slope, R.b, R.s_m, mu).sufficient

    row: dict[str, Any] = dict(task.axes)
    if "eta" not in row:
        row["eta"] = eta
    row.update(
        {
            "p0": task.p0,
            "q0": task.q0,
            "honest_fs_payoff": honest_fs,
            "fs_payoff": fs,
            "fs_gain": fs - honest_fs,
            "honest_if_payoff": honest_if,
            "if_payoff": if_,
            "if_gain": if_ - honest_if,
            "fs_margin": verdict.fs_margin,
            "if_margin": verdict.if_margin,
            "binding_ratio": _optional(lambda: binding_ratio(coeffs)),
            "mu": mu,
            "honest_wins_prob": p_h,
        }
    )

    if task.simulation is not None:
        runs = {
            "sim_honest_fs": (StrategyProfile.HH, fs_params, 0),
            "sim_fs": (StrategyProfile.FSH, fs_params, 0),
            "sim_honest_if": (StrategyProfile.HH, if_params, 1),
            "sim_if": (StrategyProfile.HIF, if_params, 1),
        }
        for name, (profile, params, miner) in runs.items():
            # Same seed for the honest and selfish runs of a role: common random numbers.
            result = run_mining_sim(_sim_config(task.simulation, profile, params, R, s, task.seed))
            row[f"{name}_mean"] = result.reward_per_round[miner]
            row[f"{name}_stderr"] = result.reward_stderr[miner]
        row["sim_rounds"] = task.simulation.rounds

    row.update(
        {
            "selfish_secure": _flag(verdict.secure),
            "principle_holds": _flag(principle.principle_holds if principle else None),
            "malice_secure": _flag(None if math.isnan(p_h) else p_h > 0.5),
        }
    )
    if task.slope is not None:
        row["slope_sufficient"] = _flag(slope_ok)
    return row


def _sweep_tasks(config: ExperimentConfig, seed: int) -> list[_SweepTask]:
    sweep = config.sweep
    s = config.improvement.build()
    net = config.network
    reward_specs = sweep.rewards if sweep.rewards else [config.reward]
    lambdas = sorted(sweep.lambda_s.points())
    etas = sorted(sweep.eta.points()) if sweep.eta is not None else [None]
    p0s = sorted(sweep.p0.points()) if sweep.p0 is not None else [None]
    slopes = sorted(sweep.slope.points()) if sweep.slope is not None else [None]

    tasks = []
    for spec in reward_specs:
        for lambda_s in lambdas:
            for eta in etas:
                for p0_value in p0s:
                    for slope in slopes:
                        R = spec.build(s, slope)
                        if eta is not None:
                            base = params_for_eta(eta, 0.5, sweep.eta_mode, q0=net.q0, budget=sweep.budget)
                            p0, q0 = base.p0, base.q0
                        else:
                            p0, q0 = (p0_value if p0_value is not None else net.p0), net.q0
                        axes: dict[str, Any] = {}
                        if sweep.rewards:
                            axes["reward"] = R.label or R.kind.value
                        axes["lambda_s"] = lambda_s
                        if eta is not None:
                            axes["eta"] = eta
                        if p0_value is not None:
                            axes["p0_axis"] = p0_value
                        if slope is not None:
                            axes["slope"] = slope
                        index = len(tasks)
                        tasks.append(
                            _SweepTask(
                                index=index,
                                axes=axes,
                                reward=R,
                                s=s,
                                lambda_s=lambda_s,
                                p0=p0,
                                q0=q0,
                                slope=slope,
                                simulation=config.simulation if sweep.simulate else None,
                                seed=derive_seed(seed, index),
                            )
                        )
    return tasks


def eta_thresholds(rows: Iterable[dict[str, Any]]) -> list[dict[str, Any]]:
    """Smallest swept eta per group at which honest mining beats fork-and-steal."""
    groups: dict[tuple, dict[str, Any]] = {}
    for row in rows:
        key = tuple((name, row[name]) for name in ("reward", "lambda_s", "p0_axis", "slope") if name in row)
        entry = groups.setdefault(key, {**dict(key), "min_secure_eta": NAN})
        if row["fs_gain"] < 0 and (math.isnan(entry["min_secure_eta"]) or row["eta"] < entry["min_secure_eta"]):
            entry["min_secure_eta"] = row["eta"]
    return list(groups.values())


def cmd_sweep(config: ExperimentConfig, settings: Settings | None = None) -> list[Path]:
    """Cartesian sweep, one row per grid point in lexicographic axis order."""
    if config.sweep is None:
        raise ConfigError("the sweep command needs a sweep section", field="sweep")
    settings = settings or get_settings()
    seed = config.seed if config.seed is not None else settings.seed
    tasks = _sweep_tasks(config, seed)
    logger.info("sweeping %d grid points with %d worker(s)", len(tasks), _jobs(config, settings))
    rows = _map(_sweep_point, tasks, _jobs(config, settings))

    fmt = config.output.format
    written = [write_rows(rows, config.output.path, fmt)]
    if config.sweep.eta is not None:
        written.append(write_rows(eta_thresholds(rows), sibling_path(config.output.path, "thresholds", fmt), fmt))
    return written


# region

@dataclass(frozen=True)
class _RegionTask:
    reward: RewardFunction
    s: ImprovementPair
    etas: tuple[float, ...]
    lambda_resolution: float
    mode: str
    q0: float
    budget: float


def _region_rows(task: _RegionTask) -> list[dict[str, Any]]:
    region = secure_region(
        task.reward,
        task.s,
        task.etas,
        lambda_resolution=task.lambda_resolution,
        mode=task.mode,
        q0=task.q0,
        budget=task.budget,
    )
    label = task.reward.label or task.reward.kind.value
    rows = []
    for i, eta in enumerate(region.eta):
        rows.append(
            {
                "reward": label,
                "eta": float(eta),
                "selfish_boundary": float(region.selfish_boundary[i]),
                "malice_boundary": float(region.malice_boundary[i]),
                "approx_malice_boundary": _optional(lambda: approx_malice_boundary(float(eta))),
                "longrange_bound": float(region.longrange_bound[i]),
                "eta_half_reference": 0.5,
            }
        )
    return rows


def cmd_region(config: ExperimentConfig, settings: Settings | None = None) -> list[Path]:
    """Selfishness and maliciousness boundaries per eta, one block of rows per reward."""
    settings = settings or get_settings()
    section = config.region
    s = config.improvement.build()
    etas = tuple(sorted(section.eta.points()))
    tasks = [
        _RegionTask(spec.build(s), s, etas, section.lambda_resolution, section.mode, config.network.q0, section.budget)
        for spec in section.rewards
    ]
    blocks = _map(_region_rows, tasks, _jobs(config, settings))
    rows = [row for block in blocks for row in block]
    return [write_rows(rows, config.output.path, config.output.format)]


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "region": cmd_region,
}
