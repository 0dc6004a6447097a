"""Experiment harness: configuration, scoring, persistence and small
end-to-end runs."""

import numpy as np
import pytest
import yaml

from conftest import TINY_RUN

from poshs.agent import AgentState, EpisodeLog, StepRecord
from poshs.harness import (
    DEFAULT_MET_SETS,
    ExperimentConfig,
    build_occupants,
    confusion_from_rows,
    load_state,
    make_env,
    read_episode_logs,
    read_episode_rows,
    run_experiment_a,
    run_experiment_b,
    save_state,
    score,
    steps_to_confidence,
    train_phase,
    write_episode_logs,
    write_episode_rows,
    write_report,
)


class TestExperimentConfig:
    @pytest.mark.parametrize("kwargs", [
        {"n_models": 1},
        {"n_models": 6},
        {"variant": "8d"},
        {"train_episodes": 0},
        {"seeds": ()},
        {"met_sets": (("A", (1.0, 1.2)),)},   # wrong activity count
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)

    def test_roster_slices_in_order(self):
        config = ExperimentConfig(n_models=3)
        assert [name for name, _ in config.roster] == ["A", "B", "C"]
        assert config.roster[0][1] == DEFAULT_MET_SETS["A"]

    def test_from_config_sections(self, tmp_path):
        payload = {
            "experiment": {
                "n_models": 3, "variant": "4d", "pmv_band": 0.5,
                "tau": 0.11, "train_episodes": 12, "test_episodes": 5,
                "seeds": [4, 5], "alpha": 0.1,
                "met_sets": {"X": [1.0, 1.2, 1.4], "Y": [1.1, 1.3, 1.5],
                             "Z": [1.2, 1.4, 1.6]},
            },
            "environment": {"temp_step": 1.0, "n_activities": 3,
                            "max_segment_steps": 30},
        }
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump(payload))
        config = ExperimentConfig.from_file(path)
        assert config.n_models == 3
        assert config.variant == "4d"
        assert config.tau == 0.11
        assert config.seeds == (4, 5)
        assert config.policy.alpha == 0.1
        assert config.policy.gamma == 0.98      # untouched default
        assert [name for name, _ in config.roster] == ["X", "Y", "Z"]
        assert config.grid.temp_step == 1.0
        assert config.max_segment_steps == 30


class TestScore:
    def test_known_confusion(self):
        confusion = np.array([[9, 1, 0], [2, 8, 0]])
        result = score(confusion, ["A", "B"])
        assert result["accuracy"] == pytest.approx(0.85)
        assert result["per_model"]["A"]["accuracy"] == pytest.approx(0.9)
        assert result["per_model"]["A"]["precision"] \
            == pytest.approx(9 / 11)
        assert result["per_model"]["B"]["accuracy"] == pytest.approx(0.8)
        assert result["per_model"]["B"]["precision"] == pytest.approx(8 / 9)
        f1_a = result["per_model"]["A"]["f1"]
        assert f1_a == pytest.approx(2 * (9 / 11) * 0.9 / ((9 / 11) + 0.9))
        assert result["macro_f1"] == pytest.approx(
            np.mean([f1_a, result["per_model"]["B"]["f1"]]))

    def test_new_user_column_counts_against_accuracy(self):
        confusion = np.array([[8, 0, 2], [0, 10, 0]])
        assert score(confusion, ["A", "B"])["accuracy"] \
            == pytest.approx(0.9)

    def test_validation(self):
        with pytest.raises(ValueError):
            score(np.zeros((2, 2)), ["A", "B"])
        with pytest.raises(ValueError):
            score(np.array([[0, 0, 0], [1, 2, 0]]), ["A", "B"])

    def test_confusion_from_rows(self):
        rows = [
            {"true_occupant": "A", "predicted": "A"},
            {"true_occupant": "A", "predicted": "B"},
            {"true_occupant": "B", "predicted": "new"},
            {"true_occupant": "B", "predicted": "B"},
        ]
        confusion = confusion_from_rows(rows, ["A", "B"])
        assert confusion.tolist() == [[1, 1, 0], [0, 1, 1]]


def synthetic_log(beliefs, pool_ids, true_occupant="A"):
    steps = [
        StepRecord(step=i, activity=0, temp=22.0, hum=40.0, human_action=4,
                   valid=True, human_reward=1.0, shs_action=4,
                   shs_reward=1.0, belief=list(b))
        for i, b in enumerate(beliefs)
    ]
    return EpisodeLog(episode=0, seed=0, true_occupant=true_occupant,
                      variant="12d", identified=pool_ids[0] if pool_ids
                      else None, is_new=False, pool_ids=pool_ids,
                      divergences={}, profile=None, steps=steps)


class TestStepsToConfidence:
    def test_first_step_reaching_level(self):
        log = synthetic_log([[0.6, 0.4], [0.95, 0.05], [0.99, 0.01]],
                            ["user-0", "user-1"])
        mapping = {"user-0": "A", "user-1": "B"}
        assert steps_to_confidence(log, mapping) == 1
        assert steps_to_confidence(log, mapping, level=0.5) == 0

    def test_belief_in_a_person_sums_their_entries(self):
        # two pool entries map to the same occupant; neither alone
        # reaches the level but together they do
        log = synthetic_log([[0.5, 0.2, 0.3], [0.55, 0.05, 0.40]],
                            ["user-0", "user-1", "user-2"])
        mapping = {"user-0": "A", "user-1": "B", "user-2": "A"}
        assert steps_to_confidence(log, mapping) == 1

    def test_never_confident_returns_none(self):
        log = synthetic_log([[0.6, 0.4]] * 5, ["user-0", "user-1"])
        assert steps_to_confidence(log, {"user-0": "A", "user-1": "B"}) \
            is None

    def test_wrong_identity_does_not_count(self):
        log = synthetic_log([[0.05, 0.95]], ["user-0", "user-1"])
        mapping = {"user-0": "A", "user-1": "B"}
        assert steps_to_confidence(log, mapping) is None

    def test_empty_belief_steps_are_skipped(self):
        log = synthetic_log([[], [0.95, 0.05]], ["user-0", "user-1"])
        mapping = {"user-0": "A", "user-1": "B"}
        assert steps_to_confidence(log, mapping) == 1


@pytest.fixture(scope="module")
def tiny_report():
    config = ExperimentConfig(n_models=2, seeds=(0,), **TINY_RUN)
    return config, run_experiment_a(config)


class TestExperimentA:
    def test_report_shape(self, tiny_report):
        config, (report, logs) = tiny_report
        assert report["labels"] == ["A", "B"]
        n_rows = config.train_episodes + config.test_episodes
        assert len(report["rows"]) == n_rows
        assert len(logs) == n_rows
        eval_rows = [r for r in report["rows"] if r["phase"] == "eval"]
        assert len(eval_rows) == config.test_episodes
        assert np.asarray(report["confusion"]).sum() \
            == config.test_episodes
        assert 0.0 <= report["eval_accuracy"] <= 1.0
        assert report["runtime_s"] > 0
        assert report["score"]["accuracy"] == report["eval_accuracy"]

    def test_rows_reference_real_occupants(self, tiny_report):
        _, (report, _) = tiny_report
        for row in report["rows"]:
            assert row["true_occupant"] in ("A", "B")
            assert row["n_steps"] > 0

    def test_full_run_is_deterministic(self, tiny_report):
        config, (report, logs) = tiny_report
        again, logs2 = run_experiment_a(config)
        assert again["rows"] == report["rows"]
        assert again["confusion"] == report["confusion"]
        assert again["eval_accuracy"] == report["eval_accuracy"]
        assert [l.to_record() for l in logs2] \
            == [l.to_record() for l in logs]


@pytest.fixture(scope="module")
def report_b():
    config = ExperimentConfig(n_models=2, seeds=(1,), **TINY_RUN)
    return config, run_experiment_b(config)


class TestExperimentB:

    def test_conditions(self, report_b):
        config, (report, _) = report_b
        assert set(report["conditions"]) == {"no_shs", "poshs"}
        for phase, summary in report["conditions"].items():
            assert summary["episodes"] == config.test_episodes
            assert summary["steps_mean"] > 0
        phases = {r["phase"] for r in report["rows"]}
        assert phases == {"no_shs", "poshs"}

    def test_baseline_requires_csv(self):
        config = ExperimentConfig(n_models=2, seeds=(1,), **TINY_RUN)
        with pytest.raises(FileNotFoundError):
            run_experiment_b(config, include_baseline=True)
        with pytest.raises(FileNotFoundError):
            run_experiment_b(config, baseline_csv="/nonexistent.csv")

    def test_baseline_rows_are_imported(self, report_b, tmp_path):
        config, (report, _) = report_b
        rows = [r for r in report["rows"] if r["phase"] == "no_shs"]
        path = tmp_path / "baseline.csv"
        write_episode_rows(rows, path)
        merged, _ = run_experiment_b(config, baseline_csv=str(path))
        assert "baseline" in merged["conditions"]
        assert merged["conditions"]["baseline"]["episodes"] == len(rows)
        assert merged["conditions"]["baseline"]["reward_mean"] \
            == pytest.approx(report["conditions"]["no_shs"]["reward_mean"])


class TestPersistence:
    def test_episode_rows_round_trip(self, tiny_report, tmp_path):
        _, (report, _) = tiny_report
        path = tmp_path / "episodes.csv"
        write_episode_rows(report["rows"], path)
        restored = read_episode_rows(path)
        assert len(restored) == len(report["rows"])
        for original, back in zip(report["rows"], restored):
            assert back["seed"] == original["seed"]
            assert back["episode"] == original["episode"]
            assert back["correct"] == original["correct"]
            assert back["n_steps"] == original["n_steps"]
            assert back["reward_mean"] \
                == pytest.approx(original["reward_mean"])
            assert back["steps_to_confidence"] \
                == original["steps_to_confidence"]

    def test_episode_logs_round_trip(self, tiny_report, tmp_path):
        _, (_, logs) = tiny_report
        path = tmp_path / "logs.jsonl"
        write_episode_logs(logs, path)
        restored = read_episode_logs(path)
        assert [l.to_record() for l in restored] \
            == [l.to_record() for l in logs]

    def test_write_report(self, tiny_report, tmp_path):
        _, (report, _) = tiny_report
        write_report(report, tmp_path / "out")
        assert (tmp_path / "out" / "episodes.csv").exists()
        summary = (tmp_path / "out" / "summary.json").read_text()
        assert "rows" not in summary
        assert "eval_accuracy" in summary

    def test_agent_state_round_trip(self, tmp_path):
        config = ExperimentConfig(n_models=2, seeds=(0,), **TINY_RUN)
        models = build_occupants(config)
        env = make_env(config)
        state = AgentState.fresh(config.grid, config.variant, config.tau,
                                 config.policy, config.n_activities)
        rng = np.random.default_rng(0)
        mapping = {}
        train_phase(config, env, models, state, rng, mapping, seed=0)
        save_state(state, mapping, tmp_path / "state")
        loaded, loaded_mapping = load_state(tmp_path / "state", config)
        assert loaded.epsilon == state.epsilon
        assert loaded.episodes_seen == state.episodes_seen
        assert loaded.variant == state.variant
        assert loaded.jsd_config.tau == state.jsd_config.tau
        assert loaded_mapping == mapping
        assert loaded.pool.ids() == state.pool.ids()
        for original, restored in zip(state.pool, loaded.pool):
            assert np.array_equal(original.q_table, restored.q_table)
            assert np.allclose(original.profile.mu, restored.profile.mu)


class TestBuildOccupants:
    def test_cache_returns_shared_models(self):
        config = ExperimentConfig(n_models=2, seeds=(0,), **TINY_RUN)
        first = build_occupants(config)
        second = build_occupants(config)
        assert all(a is b for a, b in zip(first, second))

    def test_cache_can_be_bypassed(self):
        config = ExperimentConfig(n_models=2, seeds=(0,), **TINY_RUN)
        cached = build_occupants(config)
        fresh = build_occupants(config, use_cache=False)
        assert all(a is not b for a, b in zip(cached, fresh))
        assert all(np.array_equal(a.q, b.q)
                   for a, b in zip(cached, fresh))
