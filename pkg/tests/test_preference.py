"""Preference profiles, streaming estimation and profile merging."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poshs.env import HumanAction, ThermalObservation
from poshs.preference import (
    SIGMA_FLOOR,
    EpisodeEstimator,
    EstimationError,
    GaussianParams,
    PreferenceProfile,
    gaussian_pdf,
    merge_profiles,
)


def profile_12d(mu_shift=0.0):
    mu = np.array([[22.0, 40.0], [23.0, 35.0], [21.0, 45.0]]) + mu_shift
    sigma = np.full((3, 2), 0.5)
    return PreferenceProfile("12d", mu, sigma)


class TestGaussianPdf:
    def test_peak_value(self):
        assert gaussian_pdf(GaussianParams(0.0, 1.0), 0.0) \
            == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))

    def test_one_sigma_point(self):
        params = GaussianParams(10.0, 2.0)
        expected = math.exp(-0.5) / (2.0 * math.sqrt(2.0 * math.pi))
        assert gaussian_pdf(params, 12.0) == pytest.approx(expected)

    def test_symmetry(self):
        params = GaussianParams(5.0, 1.5)
        assert gaussian_pdf(params, 3.0) == gaussian_pdf(params, 7.0)


class TestPreferenceProfile:
    def test_shapes_and_channels(self):
        profile = profile_12d()
        assert profile.n_rows == 3
        assert profile.channel(1, 0) == GaussianParams(23.0, 0.5)
        assert profile.channel(1, 1) == GaussianParams(35.0, 0.5)

    def test_4d_shares_one_row(self):
        profile = PreferenceProfile("4d", np.array([[22.0, 40.0]]),
                                    np.array([[0.5, 2.0]]))
        for activity in range(5):
            assert profile.row_for_activity(activity) == 0
            assert profile.channel(activity, 0) == GaussianParams(22.0, 0.5)

    def test_12d_activity_out_of_range(self):
        with pytest.raises(ValueError):
            profile_12d().row_for_activity(3)

    @pytest.mark.parametrize("kwargs", [
        {"variant": "6d", "mu": np.zeros((3, 2)), "sigma": np.ones((3, 2))},
        {"variant": "12d", "mu": np.zeros((3, 3)), "sigma": np.ones((3, 3))},
        {"variant": "12d", "mu": np.zeros((3, 2)), "sigma": np.ones((2, 2))},
        {"variant": "4d", "mu": np.zeros((3, 2)), "sigma": np.ones((3, 2))},
        {"variant": "12d", "mu": np.zeros((3, 2)),
         "sigma": np.full((3, 2), 0.01)},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PreferenceProfile(**kwargs)

    def test_record_round_trip_12d(self):
        profile = profile_12d()
        rec = profile.to_record()
        assert rec["variant"] == "12d"
        assert rec["temp0_mu"] == 22.0
        assert rec["hum2_sigma"] == 0.5
        assert len(rec) == 1 + 12
        back = PreferenceProfile.from_record(rec)
        assert np.array_equal(back.mu, profile.mu)
        assert np.array_equal(back.sigma, profile.sigma)

    def test_record_round_trip_4d(self):
        profile = PreferenceProfile("4d", np.array([[22.0, 40.0]]),
                                    np.array([[0.5, 2.0]]))
        rec = profile.to_record()
        assert rec["temp_mu"] == 22.0
        assert len(rec) == 1 + 4
        back = PreferenceProfile.from_record(rec)
        assert np.array_equal(back.mu, profile.mu)
        assert np.array_equal(back.sigma, profile.sigma)


class TestEpisodeEstimator:
    def test_rejects_bad_construction(self):
        with pytest.raises(ValueError):
            EpisodeEstimator(0)

    def test_ignores_th_changing_actions(self):
        estimator = EpisodeEstimator(3)
        estimator.accumulate(ThermalObservation(0, 22.0, 40.0),
                             HumanAction.INC_TEMP)
        assert estimator.n_samples == 0
        estimator.accumulate(ThermalObservation(0, 22.0, 40.0),
                             HumanAction.CONTINUE)
        estimator.accumulate(ThermalObservation(0, 23.0, 45.0),
                             HumanAction.LEAVE)
        assert estimator.n_samples == 2

    def test_activity_out_of_range(self):
        estimator = EpisodeEstimator(2)
        with pytest.raises(ValueError):
            estimator.accumulate(ThermalObservation(2, 22.0, 40.0),
                                 HumanAction.CONTINUE)

    def test_missing_activity_fails_12d_but_not_4d(self):
        estimator = EpisodeEstimator(3)
        estimator.accumulate(ThermalObservation(0, 22.0, 40.0),
                             HumanAction.CONTINUE)
        with pytest.raises(EstimationError):
            estimator.finalize("12d")
        profile = estimator.finalize("4d")
        assert profile.mu[0, 0] == 22.0

    def test_empty_episode_fails_4d(self):
        with pytest.raises(EstimationError):
            EpisodeEstimator(3).finalize("4d")

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            EpisodeEstimator(3).finalize("5d")

    def test_single_sample_hits_sigma_floor(self):
        estimator = EpisodeEstimator(1)
        estimator.accumulate(ThermalObservation(0, 22.0, 40.0),
                             HumanAction.CONTINUE)
        profile = estimator.finalize("12d")
        assert profile.mu[0, 0] == 22.0
        assert np.all(profile.sigma == SIGMA_FLOOR)

    @settings(deadline=None, max_examples=60)
    @given(st.lists(
        st.tuples(st.integers(0, 2),
                  st.floats(15.0, 30.0),
                  st.floats(20.0, 70.0)),
        min_size=3, max_size=60))
    def test_streaming_matches_batch(self, samples):
        # every activity needs at least one sample for the 12d variant
        samples = samples + [(a, 20.0 + a, 40.0 + a) for a in range(3)]
        estimator = EpisodeEstimator(3)
        per_activity = {a: [] for a in range(3)}
        for a, t, h in samples:
            estimator.accumulate(ThermalObservation(a, t, h),
                                 HumanAction.CONTINUE)
            per_activity[a].append((t, h))
        profile = estimator.finalize("12d")
        for a in range(3):
            batch = np.asarray(per_activity[a])
            assert profile.mu[a] == pytest.approx(batch.mean(axis=0),
                                                  abs=1e-9)
            expected_sigma = np.maximum(batch.std(axis=0), SIGMA_FLOOR)
            assert profile.sigma[a] == pytest.approx(expected_sigma,
                                                     abs=1e-9)
        pooled = np.asarray([(t, h) for _, t, h in samples])
        profile4 = estimator.finalize("4d")
        assert profile4.mu[0] == pytest.approx(pooled.mean(axis=0), abs=1e-9)
        assert profile4.sigma[0] == pytest.approx(
            np.maximum(pooled.std(axis=0), SIGMA_FLOOR), abs=1e-9)


class TestMergeProfiles:
    def test_identity_on_identical(self):
        profile = profile_12d()
        merged = merge_profiles(profile, profile_12d(), weight=0.5)
        assert np.array_equal(merged.mu, profile.mu)
        assert np.array_equal(merged.sigma, profile.sigma)

    def test_endpoint_weights(self):
        pool, episode = profile_12d(), profile_12d(mu_shift=2.0)
        assert np.array_equal(merge_profiles(pool, episode, 1.0).mu, pool.mu)
        assert np.array_equal(merge_profiles(pool, episode, 0.0).mu,
                              episode.mu)

    @settings(deadline=None, max_examples=40)
    @given(st.floats(0.0, 1.0))
    def test_affine_interpolation(self, weight):
        pool, episode = profile_12d(), profile_12d(mu_shift=3.0)
        merged = merge_profiles(pool, episode, weight)
        expected = weight * pool.mu + (1.0 - weight) * episode.mu
        assert np.allclose(merged.mu, expected, atol=1e-12)
        assert np.allclose(merged.sigma, pool.sigma, atol=1e-12)

    def test_variant_mismatch(self):
        profile4 = PreferenceProfile("4d", np.array([[22.0, 40.0]]),
                                     np.array([[0.5, 2.0]]))
        with pytest.raises(ValueError):
            merge_profiles(profile_12d(), profile4)

    def test_weight_bounds(self):
        with pytest.raises(ValueError):
            merge_profiles(profile_12d(), profile_12d(), weight=1.5)
