# config.py
"""
Experiment files: YAML validated by pydantic models.

Every section forbids unknown keys. Values are checked against the model's
own domain rules (ImprovementPair, RewardFunction, make_params) while the
file is loaded, so a bad experiment fails before any work starts.
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from analysis.chains import StrategyProfile
from analysis.errors import DomainError
from analysis.params import ImprovementPair, make_params
from analysis.rewards import RewardFunction, RewardKind, example_rewards
from simulation.config import SimMode, TieRule
from simulation.rng import SEED_MASK

Command = Literal["analyze", "simulate", "sweep", "region"]
OutputFormat = Literal["csv", "json"]

# Flag name -> dotted path inside the experiment mapping.
OVERRIDE_PATHS = {
    "out": "output.path",
    "format": "output.format",
    "seed": "seed",
    "rounds": "simulation.rounds",
    "jobs": "jobs",
}


class ConfigError(DomainError):
    """The experiment file cannot be read as a mapping."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NetworkSection(_Section):
    p0: float = Field(0.005, ge=0, lt=1)
    q0: float = Field(0.001, ge=0, lt=1)
    lambda1: float = Field(0.5, ge=0, le=1)

    @model_validator(mode="after")
    def _derive(self):
        make_params(self.lambda1, self.p0, self.q0)
        return self


class ImprovementSection(_Section):
    s1: float = 1.0
    s2: float = 1.0001

    @model_validator(mode="after")
    def _pair(self):
        ImprovementPair(self.s1, self.s2)
        return self

    def build(self) -> ImprovementPair:
        return ImprovementPair(self.s1, self.s2)


class RewardSection(_Section):
    """A reward curve, either one of the presets R1..R5 or given explicitly.

    ``s_m`` defaults to the largest reward argument of the improvement pair.
    """
    preset: Optional[Literal["R1", "R2", "R3", "R4", "R5"]] = None
    kind: RewardKind = RewardKind.CONSTANT
    b: float = 1.0
    k: float = 0.0
    c: float = 0.0
    e: float = 1.0
    table: list[tuple[float, float]] = Field(default_factory=list)
    s_m: Optional[float] = None
    label: str = ""

    def build(self, s: ImprovementPair, slope: float | None = None) -> RewardFunction:
        s_m = self.s_m if self.s_m is not None else s.max_argument
        if self.preset is not None:
            return example_rewards(s_m)[self.preset]
        label = self.label or self.kind.value
        if slope is not None:
            return RewardFunction.linear(slope, self.b, s_m, label=f"{label} k={slope:g}")
        if self.kind is RewardKind.CUSTOM_TABLE:
            return RewardFunction.from_table(self.table, s_m, label=label)
        return RewardFunction(self.kind, s_m=s_m, b=self.b, k=self.k, c=self.c, e=self.e, label=label)


class SimulationSection(_Section):
    profiles: list[StrategyProfile] = Field(
        default_factory=lambda: [StrategyProfile.HH, StrategyProfile.FSH, StrategyProfile.HIF]
    )
    rounds: int = Field(10**6, ge=1)
    seeds: Optional[list[int]] = None
    mode: SimMode = SimMode.CHAIN_EXACT
    truncate_at_state9: bool = True
    tie_rule: TieRule = TieRule.COIN
    batches: int = Field(50, ge=2)


class LongRangeSection(_Section):
    enabled: bool = False
    k: list[int] = Field(default_factory=lambda: [1, 3, 6])
    trials: int = Field(10**4, ge=1)
    max_steps: int = Field(10**7, ge=1)
    abandon_tolerance: float = Field(1e-9, ge=0, lt=1)

    @model_validator(mode="after")
    def _depths(self):
        if not self.k or min(self.k) < 0:
            raise ValueError("long-range depths k must be a non-empty list of non-negative integers")
        return self


class Axis(_Section):
    """Explicit ``values``, or an inclusive ``start``..``stop`` range with ``step``."""
    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = None

    @model_validator(mode="after")
    def _shape(self):
        if self.values is not None:
            if not self.values:
                raise ValueError("axis values must not be empty")
            return self
        if None in (self.start, self.stop, self.step):
            raise ValueError("an axis needs either values or start, stop and step")
        if not self.step > 0:
            raise ValueError("axis step must be positive")
        if self.stop < self.start:
            raise ValueError("axis stop must not lie below start")
        return self

    def points(self) -> list[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        # Rounded so that grids like 0.05..0.50 give clean keys.
        return [float(np.round(self.start + i * self.step, 12)) for i in range(count)]


class SweepSection(_Section):
    lambda_s: Optional[Axis] = None
    eta: Optional[Axis] = None
    p0: Optional[Axis] = None
    slope: Optional[Axis] = None
    rewards: Optional[list[RewardSection]] = None
    eta_mode: Literal["fix-q0", "fix-sum"] = "fix-q0"
    budget: float = Field(0.006, gt=0, lt=1)
    simulate: bool = False

    @model_validator(mode="after")
    def _has_axis(self):
        if self.lambda_s is None:
            raise ValueError("a sweep needs a lambda_s axis")
        if self.eta is not None and self.p0 is not None:
            raise ValueError("sweep over eta or over p0, not both")
        for value in self.lambda_s.points():
            if not 0 <= value <= 1:
                raise ValueError(f"lambda_s values must lie in [0, 1], got {value}")
        if self.eta is not None:
            for value in self.eta.points():
                if not 0 < value < 1:
                    raise ValueError(f"eta values must lie in (0, 1), got {value}")
        if self.slope is not None and min(self.slope.points()) < 0:
            raise ValueError("slope values must be non-negative")
        return self


class RegionSection(_Section):
    eta: Axis = Field(default_factory=lambda: Axis(start=0.5, stop=0.95, step=0.01))
    lambda_resolution: float = Field(1e-3, gt=0, le=0.5)
    mode: Literal["fix-q0", "fix-sum"] = "fix-sum"
    budget: float = Field(0.006, gt=0, lt=1)
    rewards: list[RewardSection] = Field(default_factory=lambda: [RewardSection()])

    @model_validator(mode="after")
    def _etas(self):
        for value in self.eta.points():
            if not 0 < value < 1:
                raise ValueError(f"eta values must lie in (0, 1), got {value}")
        return self


class OutputSection(_Section):
    path: str = "results.csv"
    format: OutputFormat = "csv"


class ExperimentConfig(_Section):
    command: Optional[Command] = None
    seed: Optional[int] = Field(None, ge=0, le=SEED_MASK)
    jobs: Optional[int] = Field(None, ge=1)
    network: NetworkSection = Field(default_factory=NetworkSection)
    improvement: ImprovementSection = Field(default_factory=ImprovementSection)
    reward: RewardSection = Field(default_factory=RewardSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    longrange: LongRangeSection = Field(default_factory=LongRangeSection)
    sweep: Optional[SweepSection] = None
    region: RegionSection = Field(default_factory=RegionSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _domain(self):
        s = self.improvement.build()
        self.reward.build(s)
        for reward in self.region.rewards:
            reward.build(s)
        if self.sweep is not None:
            for reward in self.sweep.rewards or []:
                reward.build(s)
        for seed in self.simulation.seeds or []:
            if not 0 <= seed <= SEED_MASK:
                raise ValueError(f"seeds must be 64-bit unsigned integers, got {seed}")
        return self

    def seeds(self, default: int) -> list[int]:
        if self.simulation.seeds:
            return list(self.simulation.seeds)
        return [self.seed if self.seed is not None else default]


def _set_dotted(data: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = data
    for key in parents:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[leaf] = value


def apply_overrides(data: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Merge flag values into the raw mapping; flags win over the file."""
    merged = copy.deepcopy(data)
    for name, value in overrides.items():
        if value is None:
            continue
        if name not in OVERRIDE_PATHS:
            raise KeyError(f"unknown override {name!r}")
        _set_dotted(merged, OVERRIDE_PATHS[name], value)
    return merged


def read_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read experiment file {path}: {e}", field="config") from e
    data = yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"experiment file {path} must hold a mapping at the top level", field="config")
    return data


def load_config(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    command: Command | None = None,
) -> ExperimentConfig:
    """Read, merge and validate an experiment.

    Raises:
        ConfigError: If the file is missing or not a mapping.
        yaml.YAMLError: If the file is not valid YAML.
        pydantic.ValidationError: If any value fails validation.
    """
    data = read_config_file(path) if path is not None else {}
    data = apply_overrides(data, overrides or {})
    if command is not None:
        if data.get("command") not in (None, command):
            raise ConfigError(
                f"experiment file is for {data['command']!r}, not {command!r}", field="command"
            )
        data["command"] = command
    return ExperimentConfig.model_validate(data)
