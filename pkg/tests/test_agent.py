"""Belief-weighted control agent: action values, action selection,
episode replay and the episode runner."""

import json

import numpy as np
import pytest

from poshs.agent import (
    COUNTERACTION,
    AgentState,
    EpisodeLog,
    PolicyConfig,
    Transition,
    q_net,
    run_episode,
    select_action,
    update_q,
)
from poshs.env import (
    HumanAction,
    N_SHS_ACTIONS,
    ShsAction,
    SmartHomeEnv,
    ThermalGrid,
    ThermalObservation,
)

Q_SHAPE = (3, 31, 11, N_SHS_ACTIONS)


def obs_at(grid, activity, ti, hi):
    return ThermalObservation(activity, float(grid.temp_values[ti]),
                              float(grid.hum_values[hi]))


def make_transition(grid, obs_idx, action, next_idx, reward, belief):
    return Transition(obs_at(grid, *obs_idx), action,
                      obs_at(grid, *next_idx), reward,
                      np.asarray(belief, dtype=float), True)


class TestPolicyConfig:
    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0.0},
        {"alpha": 1.5},
        {"gamma": 1.0},
        {"gamma": -0.1},
        {"epsilon_min": 0.5, "epsilon_start": 0.1},
        {"epsilon_decay": 0.0},
        {"min_activity_samples": -1},
        {"replay_passes": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PolicyConfig(**kwargs)

    def test_defaults(self):
        config = PolicyConfig()
        assert config.alpha == 0.05
        assert config.gamma == 0.98
        assert config.epsilon_start == 1.0
        assert config.epsilon_min == 0.005


class TestQNet:
    def test_belief_weighted_mixture(self, grid):
        t0 = np.full(Q_SHAPE, 1.0)
        t1 = np.full(Q_SHAPE, 2.0)
        values = q_net((0, 3, 4), np.array([0.3, 0.7]), [t0, t1])
        assert values == pytest.approx(np.full(N_SHS_ACTIONS, 1.7))

    def test_point_belief_is_single_table_row(self, grid):
        rng = np.random.default_rng(0)
        t0 = rng.normal(size=Q_SHAPE)
        t1 = rng.normal(size=Q_SHAPE)
        idx = (2, 10, 5)
        values = q_net(idx, np.array([1.0, 0.0]), [t0, t1])
        assert np.array_equal(values, t0[idx])

    def test_empty_pool_is_all_zeros(self):
        assert np.array_equal(q_net((0, 0, 0), np.zeros(0), []),
                              np.zeros(N_SHS_ACTIONS))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            q_net((0, 0, 0), np.array([1.0]), [np.zeros(Q_SHAPE)] * 2)


class TestSelectAction:
    def test_greedy_takes_clear_winner(self):
        rng = np.random.default_rng(0)
        q = np.array([0.0, 0.4, 0.0, 0.0, 0.1])
        assert select_action(q, 0.0, rng) == 1

    def test_ties_prefer_noop(self):
        rng = np.random.default_rng(0)
        assert select_action(np.zeros(5), 0.0, rng) == int(ShsAction.NOOP)
        q = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        assert select_action(q, 0.0, rng) == int(ShsAction.NOOP)

    def test_act_margin_widens_noop_preference(self):
        rng = np.random.default_rng(0)
        q = np.array([1.0, 0.0, 0.0, 0.0, 0.6])
        assert select_action(q, 0.0, rng, act_margin=0.5) \
            == int(ShsAction.NOOP)
        assert select_action(q, 0.0, rng, act_margin=0.1) == 0

    def test_forbidden_action_is_never_taken(self):
        rng = np.random.default_rng(0)
        q = np.array([5.0, 1.0, 1.0, 1.0, 0.0])
        assert select_action(q, 0.0, rng, forbidden=0) == 1
        counts = np.zeros(5, dtype=int)
        for _ in range(20000):
            counts[select_action(q, 1.0, rng, forbidden=0)] += 1
        assert counts[0] == 0
        assert np.all(np.abs(counts[1:] - 5000) < 300)

    def test_exploration_is_uniform(self):
        rng = np.random.default_rng(1)
        counts = np.zeros(5, dtype=int)
        for _ in range(20000):
            counts[select_action(np.zeros(5), 1.0, rng)] += 1
        assert np.all(np.abs(counts - 4000) < 250)

    def test_hold_pins_greedy_to_noop_but_not_exploration(self):
        rng = np.random.default_rng(2)
        q = np.array([9.0, 0.0, 0.0, 0.0, 0.0])
        for _ in range(10):
            assert select_action(q, 0.0, rng, hold=True) \
                == int(ShsAction.NOOP)
        explored = {select_action(q, 1.0, rng, hold=True)
                    for _ in range(200)}
        assert explored - {int(ShsAction.NOOP)}

    def test_counteraction_table_inverts_th_moves(self):
        assert COUNTERACTION == {
            int(HumanAction.INC_TEMP): int(ShsAction.DEC_TEMP),
            int(HumanAction.DEC_TEMP): int(ShsAction.INC_TEMP),
            int(HumanAction.INC_HUM): int(ShsAction.DEC_HUM),
            int(HumanAction.DEC_HUM): int(ShsAction.INC_HUM),
        }
        assert HumanAction.CONTINUE not in COUNTERACTION
        assert HumanAction.LEAVE not in COUNTERACTION


class TestUpdateQ:
    def test_single_transition_single_pass(self, grid):
        # full belief, unit reward, empty successor row: the new value
        # is exactly alpha
        config = PolicyConfig(replay_passes=1)
        table = np.zeros(Q_SHAPE)
        tr = make_transition(grid, (0, 5, 5), 2, (0, 5, 6), 1.0, [1.0])
        update_q([table], [tr], config, grid)
        assert table[0, 5, 5, 2] == 0.05
        assert np.count_nonzero(table) == 1

    def test_zero_belief_with_empty_successor_keeps_zero(self, grid):
        config = PolicyConfig(replay_passes=1)
        table = np.zeros(Q_SHAPE)
        tr = make_transition(grid, (0, 5, 5), 2, (0, 5, 6), 1.0, [0.0])
        update_q([table], [tr], config, grid)
        assert np.count_nonzero(table) == 0

    def test_belief_scales_only_the_reward(self, grid):
        config = PolicyConfig(replay_passes=1)
        table = np.zeros(Q_SHAPE)
        table[0, 5, 6, :] = 2.0            # successor value to bootstrap
        tr = make_transition(grid, (0, 5, 5), 2, (0, 5, 6), 1.0, [0.25])
        update_q([table], [tr], config, grid)
        expected = 0.05 * (1.0 * 0.25 + 0.98 * 2.0)
        assert table[0, 5, 5, 2] == pytest.approx(expected, abs=1e-15)

    def test_new_table_replays_with_full_weight(self, grid):
        config = PolicyConfig(replay_passes=1)
        known = np.zeros(Q_SHAPE)
        enrolled = np.zeros(Q_SHAPE)
        # belief has one entry: it predates the enrolment of the second
        tr = make_transition(grid, (1, 2, 3), 0, (1, 3, 3), 1.0, [0.4])
        update_q([known, enrolled], [tr], config, grid, new_index=1)
        assert known[1, 2, 3, 0] == pytest.approx(0.05 * 0.4)
        assert enrolled[1, 2, 3, 0] == 0.05

    def test_replay_passes_compose(self, grid):
        transitions = [
            make_transition(grid, (0, 5, 5), 0, (0, 6, 5), 1.0, [1.0]),
            make_transition(grid, (0, 6, 5), 4, (0, 6, 5), 1.0, [1.0]),
            make_transition(grid, (0, 6, 5), 1, (0, 5, 5), -0.1, [1.0]),
        ]
        once = PolicyConfig(replay_passes=1)
        thrice = PolicyConfig(replay_passes=3)
        t_multi = np.zeros(Q_SHAPE)
        update_q([t_multi], transitions, thrice, grid)
        t_seq = np.zeros(Q_SHAPE)
        for _ in range(3):
            update_q([t_seq], transitions, once, grid)
        assert np.array_equal(t_multi, t_seq)
        assert np.count_nonzero(t_multi) > 0

    def test_values_stay_bounded(self, grid):
        config = PolicyConfig(replay_passes=1)
        rng = np.random.default_rng(3)
        table = np.zeros(Q_SHAPE)
        transitions = []
        cells = [(0, int(rng.integers(31)), int(rng.integers(11)))
                 for _ in range(6)]
        for i in range(24):
            transitions.append(make_transition(
                grid, cells[i % 6], int(rng.integers(5)),
                cells[(i + 1) % 6], 1.0, [1.0]))
        for _ in range(400):
            update_q([table], transitions, config, grid)
        bound = 1.0 / (1.0 - config.gamma)
        assert table.max() <= bound + 1e-9

    def test_matches_textbook_q_learning_bitwise(self, grid, log_replayer):
        _, textbook_replay = log_replayer
        config = PolicyConfig(replay_passes=1)
        rng = np.random.default_rng(4)
        cells = [(int(rng.integers(3)), int(rng.integers(31)),
                  int(rng.integers(11))) for _ in range(8)]
        transitions = []
        raw = []
        for i in range(30):
            action = int(rng.integers(5))
            reward = float(rng.choice([1.0, 0.9, 0.0, -0.1]))
            transitions.append(make_transition(
                grid, cells[i % 8], action, cells[(i + 3) % 8], reward,
                [1.0]))
            raw.append((cells[i % 8], action, cells[(i + 3) % 8], reward))
        agent_table = np.zeros(Q_SHAPE)
        update_q([agent_table], transitions, config, grid)
        reference = textbook_replay(np.zeros(Q_SHAPE), raw,
                                    config.alpha, config.gamma)
        assert np.array_equal(agent_table, reference)


class TestAgentState:
    def test_fresh_defaults(self, grid):
        state = AgentState.fresh(grid)
        assert state.epsilon == 1.0
        assert len(state.pool) == 0
        assert state.pool.q_shape == Q_SHAPE
        assert state.jsd_config.tau == 0.20
        state4 = AgentState.fresh(grid, "4d")
        assert state4.jsd_config.tau == 0.13

    def test_decay_epsilon_floors(self, grid):
        state = AgentState.fresh(grid)
        for _ in range(500):
            state.decay_epsilon()
        assert state.epsilon == state.policy.epsilon_min


def run_one(model, grid, seed=11, rng_seed=42, policy=None, **kwargs):
    state = AgentState.fresh(grid, policy=policy,
                             n_activities=model.n_activities)
    env = SmartHomeEnv(grid=grid, n_activities=model.n_activities)
    log = run_episode(env, model, state, seed=seed,
                      rng=np.random.default_rng(rng_seed), **kwargs)
    return state, log


class TestRunEpisode:
    def test_deterministic_given_seeds(self, model_a, grid):
        _, first = run_one(model_a, grid)
        _, again = run_one(model_a, grid)
        assert first.to_record() == again.to_record()

    def test_log_record_round_trip(self, model_a, grid):
        _, log = run_one(model_a, grid)
        payload = json.dumps(log.to_record())
        restored = EpisodeLog.from_record(json.loads(payload))
        assert restored.to_record() == log.to_record()
        assert restored.n_steps == log.n_steps
        assert restored.human_rewards() == log.human_rewards()
        assert restored.th_changing_human_actions() \
            == log.th_changing_human_actions()

    def test_first_episode_enrolls(self, model_a, grid):
        state, log = run_one(model_a, grid)
        assert log.is_new
        assert log.identified == "user-0"
        assert log.pool_ids == []
        assert len(state.pool) == 1
        assert log.profile["variant"] == "12d"
        assert state.pool.entries[0].q_table.any()   # training happened

    def test_disabled_agent_never_acts(self, model_a, grid):
        _, log = run_one(model_a, grid, shs_enabled=False, identify=False)
        assert all(s.shs_action is None for s in log.steps)
        assert all(s.belief == [] for s in log.steps)
        assert log.identified is None
        assert log.variant is None
        assert log.profile is None

    def test_identify_off_leaves_pool_untouched(self, model_a, grid):
        state, log = run_one(model_a, grid, identify=False)
        assert len(state.pool) == 0
        assert log.identified is None
        assert any(s.shs_action is not None for s in log.steps)

    def test_thin_evidence_blocks_enrolment(self, model_a, grid):
        policy = PolicyConfig(min_activity_samples=100)
        state, log = run_one(model_a, grid, policy=policy)
        assert log.is_new
        assert log.identified is None
        assert len(state.pool) == 0

    def test_single_occupant_run_is_plain_q_learning(
            self, model_a, grid, log_replayer):
        transitions_from_log, textbook_replay = log_replayer
        policy = PolicyConfig(replay_passes=1)
        state = AgentState.fresh(grid, tau=1e9, policy=policy,
                                 n_activities=model_a.n_activities)
        env = SmartHomeEnv(grid=grid, n_activities=model_a.n_activities)
        rng = np.random.default_rng(5)
        logs = []
        for i in range(5):
            logs.append(run_episode(env, model_a, state,
                                    seed=int(rng.integers(2 ** 31 - 1)),
                                    rng=rng, episode_id=i, train=True))
        assert len(state.pool) == 1
        reference = np.zeros(Q_SHAPE)
        for log in logs:
            textbook_replay(reference, transitions_from_log(log, grid),
                            policy.alpha, policy.gamma,
                            passes=policy.replay_passes)
        assert np.array_equal(state.pool.entries[0].q_table, reference)

    def test_second_visit_matches_not_enrolls(self, model_a, grid):
        state = AgentState.fresh(grid, n_activities=model_a.n_activities)
        env = SmartHomeEnv(grid=grid, n_activities=model_a.n_activities)
        rng = np.random.default_rng(6)
        first = run_episode(env, model_a, state, seed=1, rng=rng,
                            episode_id=0)
        second = run_episode(env, model_a, state, seed=2, rng=rng,
                             episode_id=1)
        assert first.is_new
        assert not second.is_new
        assert second.identified == "user-0"
        assert second.pool_ids == ["user-0"]
        assert "user-0" in second.divergences
        assert len(state.pool) == 1
