#!/usr/bin/env python3
"""A tour of one simulated occupant.

Builds a single occupant, shows how their metabolic rates translate
into a comfort surface over the thermostat grid, pretrains their
correction policy, and then replays one unassisted home visit so you
can watch them steer the thermostat into their comfort band and dwell
near their preferred point.

Run: python3 demos/01_occupant_comfort.py
"""

import numpy as np

from poshs import (
    HumanAction,
    HumanModel,
    OccupantRuntime,
    SmartHomeEnv,
    ThermalGrid,
    pmv,
    pretrain,
)

ACTIVITY_NAMES = ("relaxing", "cooking", "cleaning")


def main() -> None:
    grid = ThermalGrid()
    model = HumanModel(id="Ada", met_indices=(1.02, 1.11, 1.38), grid=grid)

    print("Occupant 'Ada' with one metabolic rate per activity:")
    for a, name in enumerate(ACTIVITY_NAMES):
        t_star, h_star = model.preferred[a]
        met = model.met_indices[a]
        print(f"  {name:<9} met={met:.2f}  prefers "
              f"{t_star:5.2f} degC / {h_star:4.1f} %RH  "
              f"(PMV there: {pmv(t_star, h_star, met):+.3f})")

    a = 2
    in_band = model.in_band[a]
    print(f"\nComfort band (|PMV| <= {model.pmv_band}) while "
          f"{ACTIVITY_NAMES[a]}: {int(in_band.sum())} of "
          f"{in_band.size} grid cells")
    print("Band slice along temperature at 45 %RH:  "
          + "".join("#" if in_band[ti, grid.hum_index(45.0)] else "."
                    for ti in range(grid.n_temp)))

    env = SmartHomeEnv(grid=grid)
    env.register(model.id)
    print("\nPretraining Ada's correction policy...")
    pretrain(model, env, episodes=150, seed=7)

    print("\nOne unassisted visit (environment seed 3):")
    obs = env.reset(seed=3, occupant_id=model.id)
    runtime = OccupantRuntime(model, np.random.default_rng(42))
    step = 0
    while not env.terminal:
        prev = obs
        obs = env.apply_action(runtime.act(obs, env))
        action = env.last_human_action
        runtime.after(action)
        marker = "in band" if model.in_band[
            prev.activity, grid.temp_index(prev.temp),
            grid.hum_index(prev.hum)] else "       "
        print(f"  step {step:2d}  {ACTIVITY_NAMES[prev.activity]:<9} "
              f"{prev.temp:5.1f} degC {prev.hum:4.0f} %RH  {marker}  "
              f"-> {HumanAction(action).name}")
        step += 1
    print(f"\nVisit over after {step} steps; Ada corrected the "
          "thermostat herself whenever she was outside the band.")


if __name__ == "__main__":
    main()
