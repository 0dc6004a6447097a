"""Experiment harness: occupant roster, training/eval phases, reports.

Experiment A measures identification: an agent trains against a roster
of pretrained occupants visiting in random order, then identification
accuracy is scored over evaluation episodes that cycle the roster.
Experiment B measures comfort: occupant reward and occupant-initiated
TH corrections, with and without the control agent.

Pool entries are anonymous ("user-0", ...), so scoring maps each pool
entry to the occupant whose episode created it and counts an episode
correct when the matched entry maps back to the true occupant. An
evaluation episode flagged as a new user is always an error.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .agent import AgentState, EpisodeLog, PolicyConfig, run_episode
from .env import SmartHomeEnv, ThermalGrid, env_from_config, load_config
from .occupant import HumanModel, pretrain

# Activity-level metabolic indices for the stock roster.  The spacing is
# deliberate: A and B are easy to tell apart, C shares most habits with
# B, D is a near-twin of A, and E shadows C, so each additional
# household member makes identification genuinely harder.
DEFAULT_MET_SETS = {
    "A": (1.02, 1.11, 1.38),
    "B": (1.11, 1.29, 1.47),
    "C": (1.06, 1.29, 1.38),
    "D": (1.02, 1.11, 1.47),
    "E": (1.06, 1.29, 1.33),
}

NEW_LABEL = "new"

_PRETRAIN_CACHE: dict = {}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; reproducible given the seed list."""

    n_models: int = 2
    variant: str = "12d"
    pmv_band: float = 0.25
    tau: Optional[float] = None
    pretrain_episodes: int = 350
    train_episodes: int = 150
    test_episodes: int = 50
    pretrain_seed: int = 1000
    seeds: tuple[int, ...] = (0,)
    met_sets: tuple[tuple[str, tuple[float, ...]], ...] = tuple(
        DEFAULT_MET_SETS.items())
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    grid: ThermalGrid = field(default_factory=ThermalGrid)
    n_activities: int = 3
    max_segment_steps: int = 40
    output_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if not 2 <= self.n_models <= len(self.met_sets):
            raise ValueError(
                f"n_models must be in [2, {len(self.met_sets)}]")
        if self.variant not in ("12d", "4d"):
            raise ValueError(f"unknown variant {self.variant!r}")
        for episodes in (self.pretrain_episodes, self.train_episodes,
                         self.test_episodes):
            if episodes < 1:
                raise ValueError("episode counts must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for _, mets in self.met_sets:
            if len(mets) != self.n_activities:
                raise ValueError("met set length must equal n_activities")

    @property
    def roster(self) -> tuple[tuple[str, tuple[float, ...]], ...]:
        return self.met_sets[:self.n_models]

    @classmethod
    def from_config(cls, config: dict) -> "ExperimentConfig":
        exp = dict(config.get("experiment", {}))
        env = config.get("environment", {})
        kwargs = {}
        for key in ("n_models", "variant", "pmv_band", "tau",
                    "pretrain_episodes", "train_episodes", "test_episodes",
                    "pretrain_seed", "output_dir"):
            if key in exp:
                kwargs[key] = exp[key]
        if "seeds" in exp:
            kwargs["seeds"] = tuple(int(s) for s in exp["seeds"])
        if "met_sets" in exp:
            kwargs["met_sets"] = tuple(
                (str(name), tuple(float(m) for m in mets))
                for name, mets in exp["met_sets"].items())
        policy_keys = ("alpha", "gamma", "epsilon_start", "epsilon_min",
                       "epsilon_decay", "merge_weight")
        overrides = {k: exp[k] for k in policy_keys if k in exp}
        if overrides:
            kwargs["policy"] = replace(PolicyConfig(), **overrides)
        kwargs["grid"] = ThermalGrid.from_config(env)
        if "n_activities" in env:
            kwargs["n_activities"] = int(env["n_activities"])
        if "max_segment_steps" in env:
            kwargs["max_segment_steps"] = int(env["max_segment_steps"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_config(load_config(path))


def make_env(config: ExperimentConfig) -> SmartHomeEnv:
    return SmartHomeEnv(
        grid=config.grid,
        n_activities=config.n_activities,
        max_segment_steps=config.max_segment_steps,
        registered={name for name, _ in config.roster},
    )


def build_occupants(config: ExperimentConfig,
                    use_cache: bool = True) -> list[HumanModel]:
    """Pretrained roster; cached so repeated seeds share the training."""
    models = []
    for name, mets in config.roster:
        key = (name, mets, config.pmv_band, config.grid,
               config.pretrain_episodes, config.pretrain_seed,
               config.n_activities, config.max_segment_steps)
        if not use_cache or key not in _PRETRAIN_CACHE:
            model = HumanModel(id=name, met_indices=mets,
                               pmv_band=config.pmv_band, grid=config.grid)
            env = SmartHomeEnv(grid=config.grid,
                               n_activities=config.n_activities,
                               max_segment_steps=config.max_segment_steps)
            pretrain(model, env, episodes=config.pretrain_episodes,
                     seed=config.pretrain_seed)
            if not use_cache:
                models.append(model)
                continue
            _PRETRAIN_CACHE[key] = model
        models.append(_PRETRAIN_CACHE[key])
    return models


def steps_to_confidence(log: EpisodeLog, mapping: dict,
                        level: float = 0.9) -> Optional[int]:
    """First step holding at least ``level`` belief in the true occupant.

    One occupant can own several pool entries (repeat visits under
    drifting moods enrol satellites), so the belief in a *person* is the
    sum over the entries assigned to them. Tracking the true occupant,
    not the current best guess, makes this the time to a confident and
    correct identification; episodes that never get there return None.
    """
    for s in log.steps:
        if not s.belief:
            continue
        total = sum(b for nid, b in zip(log.pool_ids, s.belief)
                    if mapping.get(nid, nid) == log.true_occupant)
        if total >= level:
            return s.step
    return None


def _episode_row(log: EpisodeLog, seed: int, phase: str,
                 mapping: dict) -> dict:
    if log.is_new:
        predicted = NEW_LABEL
    elif log.identified is not None:
        predicted = mapping.get(log.identified, NEW_LABEL)
    else:
        predicted = ""  # identification was off for this run
    rewards = log.human_rewards()
    segments = max(1, 1 + max(s.activity for s in log.steps))
    return {
        "seed": seed,
        "phase": phase,
        "episode": log.episode,
        "true_occupant": log.true_occupant,
        "pool_entry": log.identified if log.identified is not None else "",
        "predicted": predicted,
        "is_new": int(log.is_new),
        "correct": int(predicted == log.true_occupant),
        "n_steps": log.n_steps,
        "reward_mean": float(np.mean(rewards)) if rewards else 0.0,
        "th_changes_per_segment":
            log.th_changing_human_actions() / segments,
        "steps_to_confidence":
            steps_to_confidence(log, mapping) if log.steps else None,
        "min_divergence": min(log.divergences.values())
            if log.divergences else None,
    }


def score(confusion: np.ndarray, labels: list[str]) -> dict:
    """Per-occupant accuracy (recall), precision and F1 from a confusion
    matrix whose rows are true occupants and whose columns are the same
    occupants plus a trailing new-user column."""
    confusion = np.asarray(confusion, dtype=float)
    if confusion.shape != (len(labels), len(labels) + 1):
        raise ValueError("confusion must be (n_labels, n_labels + 1)")
    if np.any(confusion.sum(axis=1) == 0):
        raise ValueError("every true occupant needs at least one episode")
    per_model = {}
    for i, label in enumerate(labels):
        tp = confusion[i, i]
        row = confusion[i].sum()
        col = confusion[:, i].sum()
        recall = tp / row
        precision = tp / col if col > 0 else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall > 0 else 0.0)
        per_model[label] = {"accuracy": float(recall),
                            "precision": float(precision),
                            "f1": float(f1)}
    overall = float(np.trace(confusion[:, :len(labels)]) / confusion.sum())
    return {
        "per_model": per_model,
        "accuracy": overall,
        "macro_f1": float(np.mean([m["f1"] for m in per_model.values()])),
    }


def train_phase(config: ExperimentConfig, env: SmartHomeEnv,
                models: list[HumanModel], state: AgentState,
                rng: np.random.Generator, mapping: dict,
                seed: int) -> tuple[list[dict], list[EpisodeLog]]:
    """Training episodes with the occupant drawn uniformly at random.

    ``mapping`` is filled with the pool-entry -> occupant assignment
    used for scoring: each entry goes to the occupant whose training
    episodes matched it most often, falling back to whoever created it.
    """
    rows, logs = [], []
    creators: dict = {}
    match_counts: dict = {}
    for ep in range(config.train_episodes):
        model = models[int(rng.integers(len(models)))]
        log = run_episode(env, model, state,
                          seed=int(rng.integers(2 ** 31 - 1)), rng=rng,
                          episode_id=ep, train=True)
        if log.is_new and log.identified is not None:
            creators[log.identified] = log.true_occupant
            mapping[log.identified] = log.true_occupant
        elif log.identified is not None:
            counts = match_counts.setdefault(log.identified, {})
            counts[log.true_occupant] = counts.get(log.true_occupant, 0) + 1
        rows.append(_episode_row(log, seed, "train", mapping))
        logs.append(log)
        state.decay_epsilon()
    for entry, creator in creators.items():
        counts = match_counts.get(entry, {})
        if counts:
            top = max(counts.values())
            winners = sorted(k for k, v in counts.items() if v == top)
            mapping[entry] = creator if creator in winners else winners[0]
        else:
            mapping[entry] = creator
    return rows, logs


def eval_phase(config: ExperimentConfig, env: SmartHomeEnv,
               models: list[HumanModel], state: AgentState,
               rng: np.random.Generator, mapping: dict, seed: int,
               phase: str = "eval", shs_enabled: bool = True,
               identify: bool = True
               ) -> tuple[list[dict], list[EpisodeLog]]:
    """Evaluation episodes cycling the roster so every occupant is
    scored on the same number of visits (up to rounding)."""
    rows, logs = [], []
    for i in range(config.test_episodes):
        model = models[i % len(models)]
        log = run_episode(env, model, state,
                          seed=int(rng.integers(2 ** 31 - 1)), rng=rng,
                          episode_id=config.train_episodes + i,
                          shs_enabled=shs_enabled, identify=identify,
                          train=False)
        if log.is_new and log.identified is not None:
            mapping[log.identified] = log.true_occupant
        rows.append(_episode_row(log, seed, phase, mapping))
        logs.append(log)
    return rows, logs


def confusion_from_rows(rows: list[dict], labels: list[str]) -> np.ndarray:
    confusion = np.zeros((len(labels), len(labels) + 1), dtype=int)
    for row in rows:
        true_i = labels.index(row["true_occupant"])
        pred = row["predicted"]
        pred_j = labels.index(pred) if pred in labels else len(labels)
        confusion[true_i, pred_j] += 1
    return confusion


def run_experiment_a(
        config: ExperimentConfig) -> tuple[dict, list[EpisodeLog]]:
    """Identification experiment over every seed in the config."""
    started = time.monotonic()
    labels = [name for name, _ in config.roster]
    rows: list[dict] = []
    logs: list[EpisodeLog] = []
    for seed in config.seeds:
        models = build_occupants(config)
        env = make_env(config)
        state = AgentState.fresh(config.grid, config.variant, config.tau,
                                 config.policy, config.n_activities)
        rng = np.random.default_rng(seed)
        mapping: dict = {}
        r, l = train_phase(config, env, models, state, rng, mapping, seed)
        rows.extend(r)
        logs.extend(l)
        r, l = eval_phase(config, env, models, state, rng, mapping, seed)
        rows.extend(r)
        logs.extend(l)
    eval_rows = [r for r in rows if r["phase"] == "eval"]
    confusion = confusion_from_rows(eval_rows, labels)
    report = {
        "experiment": "a",
        "labels": labels,
        "config": _config_summary(config),
        "rows": rows,
        "confusion": confusion.tolist(),
        "score": score(confusion, labels),
        "eval_accuracy": float(np.mean([r["correct"] for r in eval_rows])),
        "runtime_s": time.monotonic() - started,
    }
    return report, logs


def run_experiment_b(config: ExperimentConfig,
                     baseline_csv: Optional[str] = None,
                     include_baseline: bool = False
                     ) -> tuple[dict, list[EpisodeLog]]:
    """Comfort experiment: no-agent control runs versus full runs."""
    started = time.monotonic()
    rows: list[dict] = []
    logs: list[EpisodeLog] = []
    for seed in config.seeds:
        models = build_occupants(config)
        env = make_env(config)
        rng = np.random.default_rng(seed)
        passive = AgentState.fresh(config.grid, config.variant, config.tau,
                                   config.policy, config.n_activities)
        r, l = eval_phase(config, env, models, passive, rng, {}, seed,
                          phase="no_shs", shs_enabled=False, identify=False)
        rows.extend(r)
        logs.extend(l)
        state = AgentState.fresh(config.grid, config.variant, config.tau,
                                 config.policy, config.n_activities)
        mapping: dict = {}
        train_phase(config, env, models, state, rng, mapping, seed)
        r, l = eval_phase(config, env, models, state, rng, mapping, seed,
                          phase="poshs")
        rows.extend(r)
        logs.extend(l)
    conditions = {}
    for phase in ("no_shs", "poshs"):
        sub = [r for r in rows if r["phase"] == phase]
        conditions[phase] = _condition_summary(sub)
    if include_baseline or baseline_csv is not None:
        if baseline_csv is None or not Path(baseline_csv).exists():
            raise FileNotFoundError(
                "baseline condition requested but no baseline log CSV "
                f"found at {baseline_csv!r}")
        baseline_rows = read_episode_rows(baseline_csv)
        for r in baseline_rows:
            r["phase"] = "baseline"
        rows.extend(baseline_rows)
        conditions["baseline"] = _condition_summary(baseline_rows)
    report = {
        "experiment": "b",
        "config": _config_summary(config),
        "rows": rows,
        "conditions": conditions,
        "runtime_s": time.monotonic() - started,
    }
    return report, logs


def _condition_summary(rows: list[dict]) -> dict:
    return {
        "episodes": len(rows),
        "reward_mean": float(np.mean([r["reward_mean"] for r in rows])),
        "th_changes_per_segment": float(np.mean(
            [r["th_changes_per_segment"] for r in rows])),
        "steps_mean": float(np.mean([r["n_steps"] for r in rows])),
    }


def _config_summary(config: ExperimentConfig) -> dict:
    return {
        "n_models": config.n_models,
        "variant": config.variant,
        "pmv_band": config.pmv_band,
        "tau": config.tau,
        "pretrain_episodes": config.pretrain_episodes,
        "train_episodes": config.train_episodes,
        "test_episodes": config.test_episodes,
        "seeds": list(config.seeds),
        "roster": {name: list(mets) for name, mets in config.roster},
    }


ROW_FIELDS = ["seed", "phase", "episode", "true_occupant", "pool_entry",
              "predicted", "is_new", "correct", "n_steps", "reward_mean",
              "th_changes_per_segment", "steps_to_confidence",
              "min_divergence"]


def write_episode_rows(rows: list[dict], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k))
                             for k in ROW_FIELDS})


def read_episode_rows(path) -> list[dict]:
    with Path(path).open("r", newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            row = dict(raw)
            for key in ("seed", "episode", "is_new", "correct", "n_steps"):
                if row.get(key):
                    row[key] = int(float(row[key]))
            for key in ("reward_mean", "th_changes_per_segment",
                        "min_divergence"):
                row[key] = float(row[key]) if row.get(key) else None
            row["steps_to_confidence"] = (
                int(float(row["steps_to_confidence"]))
                if row.get("steps_to_confidence") else None)
            rows.append(row)
        return rows


def write_episode_logs(logs: list[EpisodeLog], path) -> None:
    """Line-delimited JSON, one episode per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for log in logs:
            fh.write(json.dumps(log.to_record()) + "\n")


def read_episode_logs(path) -> list[EpisodeLog]:
    with Path(path).open("r") as fh:
        return [EpisodeLog.from_record(json.loads(line))
                for line in fh if line.strip()]


def save_state(state: AgentState, mapping: dict, directory) -> None:
    """Persist the agent across processes: pool, exploration, bookkeeping."""
    from .identity import save_pool

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_pool(state.pool, directory / "pool")
    (directory / "agent.json").write_text(json.dumps({
        "epsilon": state.epsilon,
        "episodes_seen": state.episodes_seen,
        "variant": state.variant,
        "tau": state.jsd_config.tau,
    }, indent=2))
    (directory / "mapping.json").write_text(json.dumps(mapping, indent=2))


def load_state(directory,
               config: ExperimentConfig) -> tuple[AgentState, dict]:
    from .identity import JsdConfig, load_pool

    directory = Path(directory)
    meta = json.loads((directory / "agent.json").read_text())
    state = AgentState(
        pool=load_pool(directory / "pool"),
        jsd_config=JsdConfig.for_grid(config.grid, meta["variant"],
                                      meta["tau"]),
        grid=config.grid,
        variant=meta["variant"],
        policy=config.policy,
        epsilon=meta["epsilon"],
        episodes_seen=meta["episodes_seen"],
    )
    mapping = json.loads((directory / "mapping.json").read_text())
    return state, mapping


def write_report(report: dict, directory) -> None:
    """Persist a run: per-episode CSV plus a JSON summary."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_episode_rows(report["rows"], directory / "episodes.csv")
    summary = {k: v for k, v in report.items() if k != "rows"}
    (directory / "summary.json").write_text(
        json.dumps(summary, indent=2, default=float))
