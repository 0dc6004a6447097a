"""Discrete thermal environment for a single-occupant smart home.

The controllable state is a (temperature, humidity) point on a fixed grid
plus the index of the activity the occupant is currently performing.
Episodes run a fixed sequence of activities; the occupant ends each
activity segment with a Leave action and the episode terminates when the
last segment ends.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import yaml


class ShsAction(enum.IntEnum):
    """Actions available to the smart home system."""

    INC_TEMP = 0
    DEC_TEMP = 1
    INC_HUM = 2
    DEC_HUM = 3
    NOOP = 4


class HumanAction(enum.IntEnum):
    """Actions available to the simulated occupant."""

    INC_TEMP = 0
    DEC_TEMP = 1
    INC_HUM = 2
    DEC_HUM = 3
    CONTINUE = 4
    LEAVE = 5


N_SHS_ACTIONS = len(ShsAction)
N_HUMAN_ACTIONS = len(HumanAction)

TH_CHANGING_HUMAN = (
    HumanAction.INC_TEMP,
    HumanAction.DEC_TEMP,
    HumanAction.INC_HUM,
    HumanAction.DEC_HUM,
)
TH_CHANGING_SHS = (
    ShsAction.INC_TEMP,
    ShsAction.DEC_TEMP,
    ShsAction.INC_HUM,
    ShsAction.DEC_HUM,
)


def is_valid_sample(action: HumanAction) -> bool:
    """A TH sample is valid when the occupant accepted the conditions.

    Continue and Leave both signal acceptance; TH-changing actions mean
    the sampled point was rejected and must not enter the estimator.
    """
    return action in (HumanAction.CONTINUE, HumanAction.LEAVE)


class ThermalObservation(NamedTuple):
    """What both agents can observe: activity index and the TH point."""

    activity: int
    temp: float
    hum: float


class UnknownOccupantError(ValueError):
    """Raised when an episode is started for an unregistered occupant."""


@dataclass(frozen=True)
class ThermalGrid:
    """Evenly spaced temperature/humidity grid with clamping arithmetic.

    Grid values are generated once so repeated lookups return
    bit-identical floats, which keeps observations usable as exact keys.
    """

    temp_min: float = 15.0
    temp_max: float = 30.0
    temp_step: float = 0.5
    hum_min: float = 20.0
    hum_max: float = 70.0
    hum_step: float = 5.0
    temp_values: np.ndarray = field(init=False, repr=False, compare=False)
    hum_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for lo, hi, step, name in (
            (self.temp_min, self.temp_max, self.temp_step, "temp"),
            (self.hum_min, self.hum_max, self.hum_step, "hum"),
        ):
            if step <= 0:
                raise ValueError(f"{name}_step must be positive")
            if hi <= lo:
                raise ValueError(f"{name} range is empty")
            n = (hi - lo) / step
            if abs(n - round(n)) > 1e-9:
                raise ValueError(f"{name} step does not divide the range")
            if round(n) + 1 < 10:
                raise ValueError(f"{name} axis needs at least 10 points")
        object.__setattr__(
            self, "temp_values",
            self.temp_min + self.temp_step * np.arange(self.n_temp))
        object.__setattr__(
            self, "hum_values",
            self.hum_min + self.hum_step * np.arange(self.n_hum))

    @property
    def n_temp(self) -> int:
        return int(round((self.temp_max - self.temp_min) / self.temp_step)) + 1

    @property
    def n_hum(self) -> int:
        return int(round((self.hum_max - self.hum_min) / self.hum_step)) + 1

    def temp_index(self, temp: float) -> int:
        return int(round((temp - self.temp_min) / self.temp_step))

    def hum_index(self, hum: float) -> int:
        return int(round((hum - self.hum_min) / self.hum_step))

    def clamp_temp_index(self, i: int) -> int:
        return min(max(i, 0), self.n_temp - 1)

    def clamp_hum_index(self, i: int) -> int:
        return min(max(i, 0), self.n_hum - 1)

    def obs_index(self, obs: ThermalObservation) -> tuple[int, int, int]:
        """Map an observation to (activity, temp index, hum index)."""
        return (obs.activity, self.temp_index(obs.temp),
                self.hum_index(obs.hum))

    @classmethod
    def from_config(cls, config: dict) -> "ThermalGrid":
        keys = ("temp_min", "temp_max", "temp_step",
                "hum_min", "hum_max", "hum_step")
        return cls(**{k: float(config[k]) for k in keys if k in config})


DEFAULT_GRID = ThermalGrid()


@dataclass
class SmartHomeEnv:
    """Alternating-turn thermal environment.

    Each time step the occupant acts first and the smart home system
    second. Activity segments are capped at ``max_segment_steps`` human
    actions; when the budget is spent any human action is recorded and
    applied as a forced Leave.
    """

    grid: ThermalGrid = field(default_factory=ThermalGrid)
    n_activities: int = 3
    max_segment_steps: int = 40
    registered: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.n_activities < 1:
            raise ValueError("n_activities must be >= 1")
        if self.max_segment_steps < 1:
            raise ValueError("max_segment_steps must be >= 1")
        self._activity = 0
        self._ti = 0
        self._hi = 0
        self._segment_steps = 0
        self._terminal = True
        self.last_human_action: Optional[HumanAction] = None

    def register(self, occupant_id: str) -> None:
        self.registered.add(occupant_id)

    def reset(self, seed: int, occupant_id: str) -> ThermalObservation:
        """Start an episode for a registered occupant at a random TH point."""
        if occupant_id not in self.registered:
            raise UnknownOccupantError(
                f"occupant {occupant_id!r} is not registered")
        rng = np.random.default_rng(seed)
        self._ti = int(rng.integers(self.grid.n_temp))
        self._hi = int(rng.integers(self.grid.n_hum))
        self._activity = 0
        self._segment_steps = 0
        self._terminal = False
        self.current_occupant = occupant_id
        self.last_human_action = None
        return self.observation()

    @property
    def terminal(self) -> bool:
        return self._terminal

    @property
    def segment_steps(self) -> int:
        return self._segment_steps

    @property
    def segment_exhausted(self) -> bool:
        """True when the current segment's next human action must be Leave."""
        return self._segment_steps >= self.max_segment_steps - 1

    def observation(self) -> ThermalObservation:
        return ThermalObservation(
            self._activity,
            float(self.grid.temp_values[self._ti]),
            float(self.grid.hum_values[self._hi]))

    def _move(self, d_temp: int, d_hum: int) -> None:
        # grid edges absorb: out-of-range moves clamp, they do not error
        self._ti = self.grid.clamp_temp_index(self._ti + d_temp)
        self._hi = self.grid.clamp_hum_index(self._hi + d_hum)

    def apply_action(self, action) -> ThermalObservation:
        """Apply one human or SHS action and return the new observation."""
        if self._terminal:
            raise ValueError("episode is terminal; call reset() first")
        if isinstance(action, HumanAction):
            if self._segment_steps >= self.max_segment_steps - 1 \
                    and action != HumanAction.LEAVE:
                action = HumanAction.LEAVE
            self.last_human_action = action
            self._segment_steps += 1
            if action == HumanAction.LEAVE:
                self._activity += 1
                self._segment_steps = 0
                if self._activity >= self.n_activities:
                    self._terminal = True
                    self._activity = self.n_activities - 1
            elif action == HumanAction.INC_TEMP:
                self._move(1, 0)
            elif action == HumanAction.DEC_TEMP:
                self._move(-1, 0)
            elif action == HumanAction.INC_HUM:
                self._move(0, 1)
            elif action == HumanAction.DEC_HUM:
                self._move(0, -1)
        elif isinstance(action, ShsAction):
            if action == ShsAction.INC_TEMP:
                self._move(1, 0)
            elif action == ShsAction.DEC_TEMP:
                self._move(-1, 0)
            elif action == ShsAction.INC_HUM:
                self._move(0, 1)
            elif action == ShsAction.DEC_HUM:
                self._move(0, -1)
        else:
            raise TypeError(f"not an action: {action!r}")
        return self.observation()


def load_config(path) -> dict:
    """Read the YAML run configuration (environment + experiment sections)."""
    with open(path, "r", encoding="utf-8") as fh:
        config = yaml.safe_load(fh)
    if not isinstance(config, dict):
        raise ValueError(f"config root must be a mapping: {path}")
    return config


def env_from_config(config: dict, registered: Sequence[str] = ()) -> SmartHomeEnv:
    section = config.get("environment", {})
    grid = ThermalGrid.from_config(section)
    return SmartHomeEnv(
        grid=grid,
        n_activities=int(section.get("n_activities", 3)),
        max_segment_steps=int(section.get("max_segment_steps", 40)),
        registered=set(registered),
    )
