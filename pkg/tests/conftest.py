"""Shared fixtures: small pretrained occupant rosters and helpers for
replaying logged episodes through an independent textbook Q-learning
implementation."""

from __future__ import annotations

import numpy as np
import pytest

from poshs.env import ThermalGrid
from poshs.harness import ExperimentConfig, build_occupants

# quick run sizes for functional tests; the acceptance suite uses the
# full defaults
TINY_RUN = dict(pretrain_episodes=40, train_episodes=10, test_episodes=6)


@pytest.fixture(scope="session")
def grid() -> ThermalGrid:
    return ThermalGrid()


@pytest.fixture(scope="session")
def models_ab():
    """Two pretrained occupants, shared across test modules."""
    config = ExperimentConfig(n_models=2, pretrain_episodes=60, seeds=(0,))
    return build_occupants(config)


@pytest.fixture(scope="session")
def model_a(models_ab):
    return models_ab[0]


@pytest.fixture(scope="session")
def model_b(models_ab):
    return models_ab[1]


def move_indices(grid: ThermalGrid, ti: int, hi: int,
                 action: int) -> tuple[int, int]:
    """Apply one TH action (shared indices 0..3) with edge clamping."""
    a = int(action)
    if a == 0:
        ti += 1
    elif a == 1:
        ti -= 1
    elif a == 2:
        hi += 1
    elif a == 3:
        hi -= 1
    return grid.clamp_temp_index(ti), grid.clamp_hum_index(hi)


def transitions_from_log(log, grid: ThermalGrid):
    """Rebuild the system-side transition stream from a step log.

    Each logged step stores the observation at the occupant's turn; the
    state the system acted on follows deterministically from the logged
    occupant action, and the successor state from the logged system
    action. Returns (state index, action, next state index, reward)
    tuples in step order.
    """
    out = []
    for s in log.steps:
        if s.shs_action is None:
            continue
        ti, hi = grid.temp_index(s.temp), grid.hum_index(s.hum)
        activity = s.activity
        if s.human_action == 5:      # leave: next activity, TH unchanged
            activity += 1
        elif s.human_action < 4:
            ti, hi = move_indices(grid, ti, hi, s.human_action)
        nti, nhi = move_indices(grid, ti, hi, s.shs_action)
        out.append(((activity, ti, hi), int(s.shs_action),
                    (activity, nti, nhi), float(s.shs_reward)))
    return out


def textbook_replay(q: np.ndarray, transitions, alpha: float, gamma: float,
                    passes: int = 1) -> np.ndarray:
    """Plain single-table Q-learning over a recorded transition list."""
    for _ in range(passes):
        for idx, action, nidx, r in transitions:
            bootstrap = float(q[nidx].max())
            cell = idx + (action,)
            q[cell] = (1.0 - alpha) * q[cell] \
                + alpha * (r + gamma * bootstrap)
    return q


@pytest.fixture(scope="session")
def log_replayer():
    """Expose the log-replay helpers to test modules as one bundle."""
    return transitions_from_log, textbook_replay
