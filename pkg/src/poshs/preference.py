"""Thermal preference profiles estimated from accepted TH samples.

A profile is a set of independent Gaussians over the temperature and
humidity channels, either one pair per activity (the "12d" variant,
3 activities x 2 channels x 2 parameters) or one pair pooled over all
activities ("4d"). Profiles are estimated per episode from the TH
points the occupant accepted (Continue/Leave steps only) and merged
into the long-lived pool profile when the episode is matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .env import HumanAction, ThermalObservation, is_valid_sample

SIGMA_FLOOR = 0.1
VARIANTS = ("12d", "4d")

CHANNEL_NAMES = ("temp", "hum")


class GaussianParams(NamedTuple):
    mu: float
    sigma: float


class EstimationError(ValueError):
    """An activity/channel needed by the variant received no samples."""


@dataclass(frozen=True)
class PreferenceProfile:
    """Per-channel Gaussians; row i of mu/sigma belongs to activity i.

    The 4d variant has a single row shared by every activity. Columns
    are (temp, hum). All sigmas are at least SIGMA_FLOOR.
    """

    variant: str
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if mu.shape != sigma.shape or mu.ndim != 2 or mu.shape[1] != 2:
            raise ValueError("mu and sigma must both have shape (rows, 2)")
        if self.variant == "4d" and mu.shape[0] != 1:
            raise ValueError("4d profiles have exactly one row")
        if np.any(sigma < SIGMA_FLOOR - 1e-12):
            raise ValueError(f"sigma below floor {SIGMA_FLOOR}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_rows(self) -> int:
        return self.mu.shape[0]

    def row_for_activity(self, activity: int) -> int:
        if self.variant == "4d":
            return 0
        if not 0 <= activity < self.n_rows:
            raise ValueError(f"activity {activity} outside profile")
        return activity

    def channel(self, activity: int, channel: int) -> GaussianParams:
        r = self.row_for_activity(activity)
        return GaussianParams(float(self.mu[r, channel]),
                              float(self.sigma[r, channel]))

    def to_record(self) -> dict:
        """Flat named-scalar form, 12 or 4 parameter fields."""
        rec = {"variant": self.variant}
        for r in range(self.n_rows):
            for c, name in enumerate(CHANNEL_NAMES):
                key = name if self.variant == "4d" else f"{name}{r}"
                rec[f"{key}_mu"] = float(self.mu[r, c])
                rec[f"{key}_sigma"] = float(self.sigma[r, c])
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "PreferenceProfile":
        variant = rec["variant"]
        rows = 1 if variant == "4d" else max(
            int(k[len(CHANNEL_NAMES[0]):-3]) + 1 for k in rec
            if k.startswith(CHANNEL_NAMES[0]) and k.endswith("_mu"))
        mu = np.empty((rows, 2))
        sigma = np.empty((rows, 2))
        for r in range(rows):
            for c, name in enumerate(CHANNEL_NAMES):
                key = name if variant == "4d" else f"{name}{r}"
                mu[r, c] = rec[f"{key}_mu"]
                sigma[r, c] = rec[f"{key}_sigma"]
        return cls(variant, mu, sigma)


def gaussian_pdf(params: GaussianParams, value: float) -> float:
    z = (value - params.mu) / params.sigma
    return math.exp(-0.5 * z * z) / (params.sigma * math.sqrt(2.0 * math.pi))


class EpisodeEstimator:
    """Streaming per-activity mean/deviation over accepted TH samples.

    Keeps raw count/sum/sum-of-squares per activity and channel, so
    finalizing to either variant is exact with no second pass.
    """

    def __init__(self, n_activities: int = 3):
        if n_activities < 1:
            raise ValueError("n_activities must be >= 1")
        self.n_activities = n_activities
        self.count = np.zeros(n_activities, dtype=int)
        self.total = np.zeros((n_activities, 2))
        self.total_sq = np.zeros((n_activities, 2))

    def accumulate(self, obs: ThermalObservation, action: HumanAction) -> None:
        """Record the observed TH point if the action accepted it."""
        if not is_valid_sample(action):
            return
        if not 0 <= obs.activity < self.n_activities:
            raise ValueError(f"activity {obs.activity} out of range")
        sample = (obs.temp, obs.hum)
        self.count[obs.activity] += 1
        self.total[obs.activity] += sample
        self.total_sq[obs.activity] += np.square(sample)

    @property
    def n_samples(self) -> int:
        return int(self.count.sum())

    def _moments(self, count: float, total: np.ndarray,
                 total_sq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mu = total / count
        var = total_sq / count - mu ** 2
        sigma = np.sqrt(np.maximum(var, 0.0))
        return mu, np.maximum(sigma, SIGMA_FLOOR)

    def finalize(self, variant: str = "12d") -> PreferenceProfile:
        """Best-estimate profile; population deviation, floored sigma."""
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if variant == "4d":
            count = self.count.sum()
            if count == 0:
                raise EstimationError("no accepted samples in episode")
            mu, sigma = self._moments(
                count, self.total.sum(axis=0), self.total_sq.sum(axis=0))
            return PreferenceProfile(variant, mu[None, :], sigma[None, :])
        mu = np.empty((self.n_activities, 2))
        sigma = np.empty((self.n_activities, 2))
        for a in range(self.n_activities):
            if self.count[a] == 0:
                raise EstimationError(
                    f"no accepted samples for activity {a}")
            mu[a], sigma[a] = self._moments(
                self.count[a], self.total[a], self.total_sq[a])
        return PreferenceProfile(variant, mu, sigma)


def merge_profiles(pool: PreferenceProfile, episode: PreferenceProfile,
                   weight: float = 0.5) -> PreferenceProfile:
    """Blend an episode profile into the pool profile.

    ``weight`` is the share kept from the pool; every parameter moves by
    the same affine rule, so merging identical profiles is the identity.
    """
    if pool.variant != episode.variant:
        raise ValueError("cannot merge profiles of different variants")
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must be in [0, 1]")
    return PreferenceProfile(
        pool.variant,
        weight * pool.mu + (1.0 - weight) * episode.mu,
        weight * pool.sigma + (1.0 - weight) * episode.sigma,
    )
