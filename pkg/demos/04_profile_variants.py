#!/usr/bin/env python3
"""Why keep one preference profile per activity?

Two occupants can be indistinguishable on pooled statistics yet easy
to tell apart activity by activity. This demo builds such a pair: both
cycle through the same three metabolic rates, just attached to
different activities — so their *pooled* thermostat statistics match,
while each activity's preferred point differs.

The per-activity profile variant separates them quickly; the pooled
variant has almost nothing to work with. The demo runs both variants
on identical seeds and compares how many settled steps the belief
needs to reach 0.9 on the true occupant.

Run: python3 demos/04_profile_variants.py
"""

import numpy as np

from poshs import (
    AgentState,
    ExperimentConfig,
    build_occupants,
    eval_phase,
    make_env,
    train_phase,
)

# Same metabolic rates, permuted across activities.
PERMUTED_ROSTER = (
    ("X", (1.02, 1.11, 1.38)),
    ("Y", (1.38, 1.02, 1.11)),
)

SEEDS = (0, 1)


def mean_steps(variant: str) -> tuple[float, int]:
    steps, censored = [], 0
    for seed in SEEDS:
        config = ExperimentConfig(
            n_models=2, variant=variant, met_sets=PERMUTED_ROSTER,
            pretrain_episodes=200, train_episodes=100, test_episodes=25,
            seeds=(seed,))
        models = build_occupants(config)
        env = make_env(config)
        state = AgentState.fresh(config.grid, variant, config.tau,
                                 config.policy, config.n_activities)
        rng = np.random.default_rng(seed)
        mapping: dict = {}
        train_phase(config, env, models, state, rng, mapping, seed)
        rows, _ = eval_phase(config, env, models, state, rng, mapping, seed)
        for row in rows:
            if row["steps_to_confidence"] is None:
                censored += 1
                steps.append(row["n_steps"])
            else:
                steps.append(row["steps_to_confidence"])
    return float(np.mean(steps)), censored


def main() -> None:
    print("Occupant X: met 1.02 / 1.11 / 1.38 across activities 0/1/2")
    print("Occupant Y: met 1.38 / 1.02 / 1.11 -- same rates, permuted\n")
    for variant, label in (("12d", "per-activity"), ("4d", "pooled")):
        mean, censored = mean_steps(variant)
        print(f"{label:>13} profiles: belief reaches 0.9 on the true "
              f"occupant after {mean:5.1f} settled steps on average "
              f"({censored} of 50 visits never get there)")
    print("\nPooled statistics are identical by construction, so only "
          "the per-activity\nrepresentation can separate this pair.")


if __name__ == "__main__":
    main()
