"""Belief-weighted tabular control agent and the episode runner.

The smart home system keeps one Q-table per discovered occupant and
acts on the belief-weighted mixture of their rows, so control degrades
gracefully while identity is still uncertain. Within an episode the
agent only collects transitions; learning and identification both
happen at the episode boundary, once the episode profile is matched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .belief import init_uniform, likelihood, update
from .env import (
    N_SHS_ACTIONS,
    HumanAction,
    ShsAction,
    SmartHomeEnv,
    ThermalGrid,
    ThermalObservation,
    is_valid_sample,
)
from .identity import JsdConfig, OccupantPool, end_of_episode
from .occupant import HumanModel, OccupantRuntime, comfort_reward
from .preference import EpisodeEstimator, PreferenceProfile

# The TH action that would revert each occupant TH action; the SHS must
# not pick it on the step right after (see select_action).
COUNTERACTION = {
    int(HumanAction.INC_TEMP): int(ShsAction.DEC_TEMP),
    int(HumanAction.DEC_TEMP): int(ShsAction.INC_TEMP),
    int(HumanAction.INC_HUM): int(ShsAction.DEC_HUM),
    int(HumanAction.DEC_HUM): int(ShsAction.INC_HUM),
}


@dataclass(frozen=True)
class PolicyConfig:
    """Learning and exploration constants for the control agent."""

    alpha: float = 0.05
    gamma: float = 0.98
    epsilon_start: float = 1.0
    epsilon_min: float = 0.005
    epsilon_decay: float = 0.97
    merge_weight: float = 0.5
    # an episode may only enroll a new occupant or reshape a stored
    # profile when every activity produced at least this many accepted
    # samples; interrupted visits still get matched, but their skewed
    # statistics never enter the pool
    min_activity_samples: int = 3
    # a greedy TH move must beat doing nothing by this much value before
    # the agent takes it; thin advantages are within model error
    act_margin: float = 0.0
    # how many times each finished episode is replayed into the tables;
    # one-step bootstrapping moves value a single cell per pass, so a few
    # extra passes let the comfort bonus reach the far corners of the
    # grid within a short training budget
    replay_passes: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.epsilon_min <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_min <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must be in (0, 1]")
        if self.min_activity_samples < 0:
            raise ValueError("min_activity_samples must be >= 0")
        if self.replay_passes < 1:
            raise ValueError("replay_passes must be >= 1")


class Transition(NamedTuple):
    """One SHS step with the belief that was current when it acted."""

    obs: ThermalObservation
    action: int
    next_obs: Optional[ThermalObservation]
    reward: float
    belief: np.ndarray
    valid_sample: bool


def q_net(obs_index: tuple[int, int, int], belief: np.ndarray,
          tables: list[np.ndarray]) -> np.ndarray:
    """Belief-weighted action values; zeros when the pool is empty."""
    if not tables:
        return np.zeros(N_SHS_ACTIONS)
    if len(belief) != len(tables):
        raise ValueError("belief length must match table count")
    rows = np.stack([t[obs_index] for t in tables])
    return belief @ rows


def select_action(q_values: np.ndarray, epsilon: float,
                  rng: np.random.Generator,
                  forbidden: Optional[int] = None,
                  act_margin: float = 0.0,
                  hold: bool = False) -> int:
    """Epsilon-greedy over SHS actions.

    Greedy ties resolve in favor of leaving the air alone: an untrained
    row is all zeros, and a controller that breaks such ties toward a
    TH change would perturb the home on every step of every episode it
    has not learned yet. ``act_margin`` widens the same preference: a TH
    move must beat NOOP by the margin, not merely match it.

    ``forbidden`` blocks one TH action for this step. It implements the
    house rule that the system never immediately undoes an adjustment
    the occupant just made; without it, a half-trained controller can
    revert the occupant's nudge every step and deadlock the visit.

    ``hold`` forces the greedy branch to NOOP while leaving exploration
    alone; the caller raises it while the belief is too split to know
    whose comfort a TH move would serve.
    """
    allowed = [a for a in range(N_SHS_ACTIONS) if a != forbidden]
    if rng.random() < epsilon:
        return int(allowed[int(rng.integers(len(allowed)))])
    if hold:
        return int(ShsAction.NOOP)
    best = max(float(q_values[a]) for a in allowed)
    if float(q_values[ShsAction.NOOP]) + act_margin >= best:
        return int(ShsAction.NOOP)
    return next(a for a in allowed if float(q_values[a]) >= best)


def update_q(tables: list[np.ndarray], transitions: list[Transition],
             config: PolicyConfig, grid: ThermalGrid,
             new_index: Optional[int] = None) -> None:
    """Replay the episode into every per-occupant table.

    Each table's update is scaled by that occupant's stored belief at
    the time of the transition. A table created at this episode's end
    has no belief history, so it replays with full weight: the match
    asserted the episode was that occupant's.

    The whole trace is replayed ``config.replay_passes`` times, in step
    order each time; repeated passes let late rewards propagate several
    cells back along the trajectory per episode instead of one.
    """
    for _ in range(config.replay_passes):
        for k, table in enumerate(tables):
            for tr in transitions:
                if k == new_index:
                    b = 1.0
                else:
                    b = float(tr.belief[k])
                idx = grid.obs_index(tr.obs) + (tr.action,)
                if tr.next_obs is None:
                    bootstrap = 0.0
                else:
                    bootstrap = float(
                        table[grid.obs_index(tr.next_obs)].max())
                table[idx] = (1.0 - config.alpha) * table[idx] \
                    + config.alpha * (tr.reward * b
                                      + config.gamma * bootstrap)


@dataclass
class AgentState:
    """Everything the SHS carries across episodes."""

    pool: OccupantPool
    jsd_config: JsdConfig
    grid: ThermalGrid
    variant: str = "12d"
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    epsilon: float = None  # type: ignore[assignment]
    episodes_seen: int = 0

    def __post_init__(self) -> None:
        if self.epsilon is None:
            self.epsilon = self.policy.epsilon_start

    @classmethod
    def fresh(cls, grid: ThermalGrid, variant: str = "12d",
              tau: Optional[float] = None,
              policy: Optional[PolicyConfig] = None,
              n_activities: int = 3) -> "AgentState":
        q_shape = (n_activities, grid.n_temp, grid.n_hum, N_SHS_ACTIONS)
        return cls(
            pool=OccupantPool(q_shape),
            jsd_config=JsdConfig.for_grid(grid, variant, tau),
            grid=grid,
            variant=variant,
            policy=policy or PolicyConfig(),
        )

    def decay_epsilon(self) -> None:
        self.epsilon = max(self.policy.epsilon_min,
                           self.epsilon * self.policy.epsilon_decay)


class StepRecord(NamedTuple):
    """One time step as seen from outside, for logs and analysis."""

    step: int
    activity: int
    temp: float
    hum: float
    human_action: int
    valid: bool
    human_reward: float
    shs_action: Optional[int]
    shs_reward: Optional[float]
    belief: list


@dataclass
class EpisodeLog:
    """Full trace of one episode plus the identification outcome."""

    episode: int
    seed: int
    true_occupant: str
    variant: Optional[str]
    identified: Optional[str]
    is_new: bool
    pool_ids: list
    divergences: dict
    profile: Optional[dict]
    steps: list

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def human_rewards(self) -> list[float]:
        return [s.human_reward for s in self.steps]

    def th_changing_human_actions(self) -> int:
        return sum(1 for s in self.steps if s.human_action < 4)

    def belief_trajectory(self) -> list[list]:
        return [s.belief for s in self.steps]

    def to_record(self) -> dict:
        rec = {
            "episode": self.episode,
            "seed": self.seed,
            "true_occupant": self.true_occupant,
            "variant": self.variant,
            "identified": self.identified,
            "is_new": self.is_new,
            "pool_ids": list(self.pool_ids),
            "divergences": dict(self.divergences),
            "profile": self.profile,
            "steps": [s._asdict() for s in self.steps],
        }
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "EpisodeLog":
        return cls(
            episode=rec["episode"],
            seed=rec["seed"],
            true_occupant=rec["true_occupant"],
            variant=rec.get("variant"),
            identified=rec.get("identified"),
            is_new=rec.get("is_new", False),
            pool_ids=list(rec.get("pool_ids", [])),
            divergences=dict(rec.get("divergences", {})),
            profile=rec.get("profile"),
            steps=[StepRecord(**s) for s in rec["steps"]],
        )


def run_episode(env: SmartHomeEnv, model: HumanModel, state: AgentState,
                seed: int, rng: np.random.Generator, episode_id: int = 0,
                shs_enabled: bool = True, identify: bool = True,
                train: bool = True) -> EpisodeLog:
    """Run one occupant visit under the agent and log everything.

    The occupant acts first each step; accepted samples update the
    estimator and the belief. The SHS then acts on the belief-weighted
    Q-mixture. At the episode boundary the profile is matched against
    the pool and, when training, every table replays the transitions.
    """
    pool_ids_at_start = state.pool.ids()
    n_pool = len(pool_ids_at_start)
    env.register(model.id)
    obs = env.reset(seed=seed, occupant_id=model.id)
    runtime = OccupantRuntime(model, rng)
    estimator = EpisodeEstimator(env.n_activities)
    belief = init_uniform(n_pool) if n_pool else np.zeros(0)
    tables = state.pool.q_tables()
    steps: list[StepRecord] = []
    transitions: list[Transition] = []
    accepted_in_segment = False
    while not env.terminal:
        obs_h = obs
        obs_after_h = env.apply_action(runtime.act(obs_h, env))
        a_h = env.last_human_action
        runtime.after(a_h)
        valid = is_valid_sample(a_h)
        if valid:
            accepted_in_segment = True
            estimator.accumulate(obs_h, a_h)
            if identify and n_pool:
                belief = update(belief, [
                    likelihood(e.profile, obs_h) for e in state.pool])
        r_h = comfort_reward(
            ThermalObservation(obs_h.activity, obs_after_h.temp,
                               obs_after_h.hum), a_h, model)
        shs_action = None
        shs_reward = None
        if shs_enabled and not env.terminal:
            o_t = obs_after_h
            q_values = q_net(state.grid.obs_index(o_t), belief, tables)
            # the agent steers only until the occupant first accepts the
            # conditions in this activity segment; from then on the air
            # is theirs, and greedy play holds still while they fine-tune
            shs_action = select_action(
                q_values, state.epsilon if train else 0.0, rng,
                forbidden=COUNTERACTION.get(int(a_h)),
                act_margin=state.policy.act_margin,
                hold=accepted_in_segment)
            o_next = env.apply_action(ShsAction(shs_action))
            shs_reward = comfort_reward(
                ThermalObservation(o_t.activity, o_next.temp, o_next.hum),
                shs_action, model)
            transitions.append(Transition(
                o_t, shs_action, o_next, shs_reward, belief.copy(), valid))
            obs = o_next
        else:
            obs = obs_after_h
        if a_h == HumanAction.LEAVE:
            accepted_in_segment = False
        steps.append(StepRecord(
            step=len(steps), activity=obs_h.activity, temp=obs_h.temp,
            hum=obs_h.hum, human_action=int(a_h), valid=valid,
            human_reward=r_h, shs_action=shs_action, shs_reward=shs_reward,
            belief=[float(b) for b in belief]))
    identified = None
    is_new = False
    divergences: dict = {}
    profile_rec = None
    if identify:
        profile = estimator.finalize(state.variant)
        profile_rec = profile.to_record()
        evidence = (int(estimator.count.min())
                    >= state.policy.min_activity_samples)
        entry, is_new, result = end_of_episode(
            state.pool, profile, state.jsd_config,
            state.policy.merge_weight, evidence=evidence)
        identified = entry.id if entry is not None else None
        divergences = result.divergences
        if train and shs_enabled:
            enrolled = is_new and entry is not None
            update_q(state.pool.q_tables(), transitions, state.policy,
                     state.grid,
                     new_index=len(state.pool) - 1 if enrolled else None)
    state.episodes_seen += 1
    return EpisodeLog(
        episode=episode_id,
        seed=seed,
        true_occupant=model.id,
        variant=state.variant if identify else None,
        identified=identified,
        is_new=is_new,
        pool_ids=pool_ids_at_start,
        divergences=divergences,
        profile=profile_rec,
        steps=steps,
    )
