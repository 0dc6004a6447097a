"""Bayesian belief over which known occupant is in the room.

The belief is a plain probability vector ordered like the occupant
pool. Episode stationarity stands in for a transition model: the
occupant does not change within an episode, so each accepted TH sample
only reweights the belief by per-occupant Gaussian likelihoods.
"""

from __future__ import annotations

import numpy as np

from .env import ThermalObservation
from .preference import GaussianParams, PreferenceProfile, gaussian_pdf

LIKELIHOOD_FLOOR = 1e-12


def init_uniform(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("belief needs at least one occupant")
    return np.full(n, 1.0 / n)


def likelihood(profile: PreferenceProfile, obs: ThermalObservation) -> float:
    """Joint density of the observed TH point under one profile.

    Temperature and humidity are independent channels; the activity
    picks the profile row (the 4d variant shares one row). Floored away
    from zero so a single outlier cannot zero out an occupant.
    """
    density = (gaussian_pdf(profile.channel(obs.activity, 0), obs.temp)
               * gaussian_pdf(profile.channel(obs.activity, 1), obs.hum))
    return max(density, LIKELIHOOD_FLOOR)


def update(belief: np.ndarray, likelihoods) -> np.ndarray:
    """One Bayes step: reweight by likelihoods and renormalize."""
    belief = np.asarray(belief, dtype=float)
    like = np.asarray(likelihoods, dtype=float)
    if belief.shape != like.shape:
        raise ValueError("belief and likelihoods must have equal length")
    if np.any(like < 0.0):
        raise ValueError("likelihoods must be nonnegative")
    posterior = belief * like
    total = posterior.sum()
    if total <= 0.0:
        raise ValueError("posterior vanished; belief and likelihoods "
                         "have disjoint support")
    return posterior / total


def posterior_closed_form(mus, sigma: float, th: float, priors) -> np.ndarray:
    """Single-channel posterior without explicit normalization.

    For occupants sharing one sigma on a channel, the posterior of
    occupant i can be written with pairwise likelihood ratios

        P(H_i | th) = P(H_i) / sum_j C(j, i) P(H_j)
        C(j, i) = exp((2 th - mu_j - mu_i)(mu_j - mu_i) / (2 sigma^2))

    Used as an independent cross-check of update(); the general path is
    the one the agent runs.
    """
    mus = np.asarray(mus, dtype=float)
    priors = np.asarray(priors, dtype=float)
    if mus.shape != priors.shape:
        raise ValueError("mus and priors must have equal length")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    out = np.empty_like(priors)
    for i, mu_i in enumerate(mus):
        denom = 0.0
        for j, mu_j in enumerate(mus):
            # a ratio that overflows means occupant i explains the
            # observation infinitely worse than occupant j, so the
            # posterior collapses to zero -- the same limit the direct
            # path reaches when its likelihood underflows
            with np.errstate(over="ignore"):
                ratio = float(np.exp(
                    (2.0 * th - mu_j - mu_i) * (mu_j - mu_i)
                    / (2.0 * sigma * sigma)))
            denom += ratio * priors[j]
        out[i] = priors[i] / denom
    return out
