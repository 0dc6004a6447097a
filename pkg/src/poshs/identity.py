"""New-versus-known occupant decisions via Jensen-Shannon divergence.

Episode profiles are compared against every pool profile channel by
channel: both Gaussians are discretized on the environment grid, the
square root of the Jensen-Shannon divergence (natural log) is taken per
channel, and channels are averaged. If even the closest pool occupant
is at least tau away, the episode belongs to somebody new.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .env import ThermalGrid
from .preference import GaussianParams, PreferenceProfile, merge_profiles

# sqrt(ln 2), one channel's largest possible value (disjoint supports)
JSD_CHANNEL_MAX = float(np.sqrt(np.log(2.0)))

DEFAULT_TAU = {"12d": 0.20, "4d": 0.13}


@dataclass(frozen=True)
class JsdConfig:
    """Divergence threshold and the grids used for discretization."""

    tau: float
    temp_grid: np.ndarray
    hum_grid: np.ndarray
    amplification: float = 1.0

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.amplification <= 0:
            raise ValueError("amplification must be positive")
        object.__setattr__(
            self, "temp_grid", np.asarray(self.temp_grid, dtype=float))
        object.__setattr__(
            self, "hum_grid", np.asarray(self.hum_grid, dtype=float))
        if self.temp_grid.size < 2 or self.hum_grid.size < 2:
            raise ValueError("grids need at least two points")

    @classmethod
    def for_grid(cls, grid: ThermalGrid, variant: str,
                 tau: Optional[float] = None) -> "JsdConfig":
        if tau is None:
            tau = DEFAULT_TAU[variant]
        return cls(tau=tau, temp_grid=grid.temp_values,
                   hum_grid=grid.hum_values)


def discretize(params: GaussianParams, grid: np.ndarray) -> np.ndarray:
    """Gaussian density sampled on the grid, normalized to a pmf."""
    z = (np.asarray(grid, dtype=float) - params.mu) / params.sigma
    weights = np.exp(-0.5 * z * z)
    total = weights.sum()
    if total <= 0.0:
        raise ValueError(
            f"gaussian mu={params.mu} sigma={params.sigma} has no mass "
            "on the grid")
    return weights / total


def _jsd_sqrt(p: np.ndarray, q: np.ndarray) -> float:
    # log(p / m) written as log(2p) - log(p + q): p + q >= p > 0 under
    # the mask, so this stays finite even for denormal tail weights
    total = p + q
    p_mask = p > 0
    q_mask = q > 0
    kl_pm = float(np.sum(p[p_mask] * (
        np.log(2.0 * p[p_mask]) - np.log(total[p_mask]))))
    kl_qm = float(np.sum(q[q_mask] * (
        np.log(2.0 * q[q_mask]) - np.log(total[q_mask]))))
    return float(np.sqrt(max(0.5 * (kl_pm + kl_qm), 0.0)))


def jsd(profile_a: PreferenceProfile, profile_b: PreferenceProfile,
        config: JsdConfig) -> float:
    """Mean per-channel root-JSD between two profiles, amplified."""
    if profile_a.variant != profile_b.variant:
        raise ValueError("cannot compare profiles of different variants")
    grids = (config.temp_grid, config.hum_grid)
    values = []
    for r in range(profile_a.n_rows):
        for c, grid in enumerate(grids):
            p = discretize(
                GaussianParams(float(profile_a.mu[r, c]),
                               float(profile_a.sigma[r, c])), grid)
            q = discretize(
                GaussianParams(float(profile_b.mu[r, c]),
                               float(profile_b.sigma[r, c])), grid)
            values.append(_jsd_sqrt(p, q))
    return config.amplification * float(np.mean(values))


@dataclass
class PoolEntry:
    """A discovered occupant: long-lived profile plus its own Q-table."""

    id: str
    profile: PreferenceProfile
    q_table: np.ndarray


class MatchResult(NamedTuple):
    is_new: bool
    occupant_id: Optional[str]
    divergences: dict


class OccupantPool:
    """Growable ordered registry of discovered occupants."""

    def __init__(self, q_shape: tuple[int, ...]):
        self.q_shape = tuple(q_shape)
        self.entries: list[PoolEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PoolEntry]:
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def get(self, occupant_id: str) -> PoolEntry:
        for entry in self.entries:
            if entry.id == occupant_id:
                return entry
        raise KeyError(occupant_id)

    def index_of(self, occupant_id: str) -> int:
        for i, entry in enumerate(self.entries):
            if entry.id == occupant_id:
                return i
        raise KeyError(occupant_id)

    def add(self, profile: PreferenceProfile) -> PoolEntry:
        entry = PoolEntry(
            id=f"user-{len(self.entries)}",
            profile=profile,
            q_table=np.zeros(self.q_shape),
        )
        self.entries.append(entry)
        return entry

    def q_tables(self) -> list[np.ndarray]:
        return [e.q_table for e in self.entries]


def match(pool: OccupantPool, episode: PreferenceProfile,
          config: JsdConfig) -> MatchResult:
    """Closest pool occupant under root-JSD, or new if all are >= tau.

    An empty pool always yields a new occupant. Ties keep the earliest
    entry, which makes matching deterministic.
    """
    divergences = {}
    best_id = None
    best = np.inf
    for entry in pool:
        d = jsd(entry.profile, episode, config)
        divergences[entry.id] = d
        if d < best:
            best, best_id = d, entry.id
    if best_id is None or best >= config.tau:
        return MatchResult(True, None, divergences)
    return MatchResult(False, best_id, divergences)


def end_of_episode(pool: OccupantPool, episode: PreferenceProfile,
                   config: JsdConfig, merge_weight: float = 0.5,
                   evidence: bool = True
                   ) -> tuple[Optional[PoolEntry], bool, MatchResult]:
    """Match the finished episode; grow the pool or refresh the match.

    New occupants enter with the episode profile and a zero Q-table.
    Known occupants have their pool profile pulled toward the episode
    profile with the given pool-side weight.

    ``evidence`` says whether the episode carried enough samples to be
    trusted as a description of somebody's preferences. Without it the
    episode is still matched (identification must answer something every
    episode) but the pool is left untouched: no enrolment, no merge. A
    flagged-new episode then returns ``(None, True, result)``.
    """
    result = match(pool, episode, config)
    if result.is_new:
        if not evidence:
            return None, True, result
        return pool.add(episode), True, result
    entry = pool.get(result.occupant_id)
    if evidence:
        entry.profile = merge_profiles(entry.profile, episode, merge_weight)
    return entry, False, result


def save_pool(pool: OccupantPool, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "q_shape": list(pool.q_shape),
        "entries": [
            {"id": e.id, "profile": e.profile.to_record()} for e in pool
        ],
    }
    (directory / "pool.json").write_text(json.dumps(meta, indent=2))
    np.savez(directory / "qtables.npz",
             **{e.id: e.q_table for e in pool})


def load_pool(directory) -> OccupantPool:
    directory = Path(directory)
    meta = json.loads((directory / "pool.json").read_text())
    pool = OccupantPool(tuple(meta["q_shape"]))
    with np.load(directory / "qtables.npz") as tables:
        for item in meta["entries"]:
            entry = pool.add(PreferenceProfile.from_record(item["profile"]))
            entry.id = item["id"]
            entry.q_table = tables[item["id"]].copy()
    return pool
