"""Simulated occupants driven by the Fanger comfort model.

Each occupant carries one metabolic index per activity. Discomfort is
the predicted mean vote (PMV) of the current TH point; the occupant
corrects uncomfortable conditions with a pretrained tabular Q policy
and, once comfortable, settles into a small seeded walk around a
per-activity preferred point before leaving for the next activity.

The preferred point is where an occupant's identity lives: its
temperature channel sits at the PMV minimum and its humidity channel
follows the metabolic index (more active people prefer drier air), so
occupants with different index sets produce separable TH profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .env import (
    N_HUMAN_ACTIONS,
    HumanAction,
    SmartHomeEnv,
    ThermalGrid,
    ThermalObservation,
)

MET_RATE_W_M2 = 58.15

# a more active occupant prefers drier air, %RH per met index
PREFERRED_HUM_BASE = 100.0
PREFERRED_HUM_SLOPE = -55.0

# habitual dwell pattern: the occupant cycles its set point by this many
# degrees / %RH around the preferred point, scaled by the band half-width
TEMP_DITHER_PER_BAND = 2.0
HUM_DITHER_PER_BAND = 20.0
DWELL_TARGET = 8
# of the DWELL_TARGET stops in a visit, this many rotate through the
# anchors in fixed order (so every anchor is always touched) before the
# remaining stops are drawn freely; fewer balanced slots means noisier
# visit-to-visit emphasis
DWELL_BALANCED_SLOTS = 4
# how far from the scheduled set point the occupant will settle anyway;
# zero means conditions are accepted only exactly at the set point, which
# keeps the sampled pattern identical no matter how often a controller
# perturbs the air in between
DWELL_TOLERANCE = 0

# day-to-day drift of the preferred point within one visit, drawn
# independently per activity so a drift in one room does not move the
# whole signature at once
MOOD_TEMP_SIGMA = 0.08
MOOD_HUM_SIGMA = 0.45

# when a segment's remaining step budget cannot fit another settle-and-
# sample round trip, the occupant walks out while still at a set point
# rather than getting caught mid-stride by the hard cap
LEAVE_RESERVE_STEPS = 3


@dataclass(frozen=True)
class ComfortParams:
    """Fixed personal factors for the comfort model.

    Mean radiant temperature is taken equal to air temperature and
    external work is zero, so only clothing and air speed remain.
    """

    clo: float = 0.5
    air_speed: float = 0.1


DEFAULT_COMFORT = ComfortParams()


def pmv(temp: float, hum: float, met_index: float,
        params: ComfortParams = DEFAULT_COMFORT) -> float:
    """Predicted mean vote (ISO 7730 heat balance) for still indoor air.

    ``hum`` is percent relative humidity, ``met_index`` is in met units.
    """
    ta = float(temp)
    m = float(met_index) * MET_RATE_W_M2
    mw = m  # no external work
    pa = float(hum) * 10.0 * math.exp(16.6536 - 4030.183 / (ta + 235.0))
    icl = 0.155 * params.clo
    fcl = 1.0 + 1.29 * icl if icl < 0.078 else 1.05 + 0.645 * icl
    hcf = 12.1 * math.sqrt(params.air_speed)
    taa = ta + 273.0
    tra = taa
    # clothing surface temperature by fixed-point iteration
    tcla = taa + (35.5 - ta) / (3.5 * (6.45 * icl + 0.1))
    p1 = icl * fcl
    p2 = p1 * 3.96
    p3 = p1 * 100.0
    p4 = p1 * taa
    p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0) ** 4
    xn = tcla / 100.0
    xf = xn / 2.0
    n = 0
    while abs(xn - xf) > 0.00015:
        n += 1
        if n > 150:
            raise ValueError("clothing surface temperature did not converge")
        xf = (xf + xn) / 2.0
        hcn = 2.38 * abs(100.0 * xf - taa) ** 0.25
        hc = hcf if hcf > hcn else hcn
        xn = (p5 + p4 * hc - p2 * xf ** 4) / (100.0 + p3 * hc)
    tcl = 100.0 * xn - 273.0
    hl1 = 3.05 * 0.001 * (5733.0 - 6.99 * mw - pa)
    hl2 = 0.42 * (mw - 58.15) if mw > 58.15 else 0.0
    hl3 = 1.7e-05 * m * (5867.0 - pa)
    hl4 = 0.0014 * m * (34.0 - ta)
    hl5 = 3.96 * fcl * (xn ** 4 - (tra / 100.0) ** 4)
    hl6 = fcl * hc * (tcl - ta)
    ts = 0.303 * math.exp(-0.036 * m) + 0.028
    return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6)


@dataclass
class HumanModel:
    """One simulated occupant: comfort physiology plus learned behavior."""

    id: str
    met_indices: tuple[float, ...]
    pmv_band: float = 0.25
    grid: ThermalGrid = field(default_factory=ThermalGrid)
    params: ComfortParams = DEFAULT_COMFORT
    dither_temp_steps: Optional[int] = None
    dither_hum_steps: Optional[int] = None
    dwell_target: int = DWELL_TARGET
    mood_temp_sigma: float = MOOD_TEMP_SIGMA
    mood_hum_sigma: float = MOOD_HUM_SIGMA

    def __post_init__(self) -> None:
        if not self.met_indices:
            raise ValueError("met_indices must not be empty")
        self.met_indices = tuple(float(m) for m in self.met_indices)
        for m in self.met_indices:
            if not 0.5 <= m <= 3.0:
                raise ValueError(f"met index {m} outside plausible range")
        if self.pmv_band <= 0:
            raise ValueError("pmv_band must be positive")
        # the dither amplitude must exceed the acceptance tolerance or the
        # schedule's anchors blur into a single resting cell
        if self.dither_temp_steps is None:
            self.dither_temp_steps = max(DWELL_TOLERANCE + 1, round(
                TEMP_DITHER_PER_BAND * self.pmv_band / self.grid.temp_step))
        if self.dither_hum_steps is None:
            self.dither_hum_steps = max(DWELL_TOLERANCE + 1, round(
                HUM_DITHER_PER_BAND * self.pmv_band / self.grid.hum_step))
        if self.dwell_target < 1:
            raise ValueError("dwell_target must be >= 1")
        self.n_activities = len(self.met_indices)
        self._build_tables()
        self.q = np.zeros(
            (self.n_activities, self.grid.n_temp, self.grid.n_hum,
             N_HUMAN_ACTIONS))

    def _build_tables(self) -> None:
        g = self.grid
        table = np.empty((self.n_activities, g.n_temp, g.n_hum))
        for a, met in enumerate(self.met_indices):
            for ti, t in enumerate(g.temp_values):
                for hi, h in enumerate(g.hum_values):
                    table[a, ti, hi] = pmv(t, h, met, self.params)
        self.pmv_table = table
        self.in_band = np.abs(table) <= self.pmv_band
        pref = np.empty((self.n_activities, 2))
        for a, met in enumerate(self.met_indices):
            h_star = float(np.clip(
                PREFERRED_HUM_BASE + PREFERRED_HUM_SLOPE * met,
                g.hum_min, g.hum_max))
            res = minimize_scalar(
                lambda t: abs(pmv(t, h_star, met, self.params)),
                bounds=(g.temp_min, g.temp_max), method="bounded",
                options={"xatol": 1e-4})
            pref[a] = (float(res.x), h_star)
        self.preferred = pref

    def dwell_anchors(self, activity: int,
                      mood: tuple[float, float] = (0.0, 0.0)
                      ) -> list[tuple[int, int]]:
        """The three grid stops an occupant alternates between while
        dwelling: the preferred point and a nudge up/down on both
        channels by the dither amplitude. Stops never land outside the
        comfort band; the nudge shrinks back toward the preferred point
        until it fits. ``mood`` shifts the whole visit."""
        g = self.grid
        t0 = g.clamp_temp_index(
            g.temp_index(self.preferred[activity, 0] + mood[0]))
        h0 = g.clamp_hum_index(
            g.hum_index(self.preferred[activity, 1] + mood[1]))
        stops = []
        for dt, dh in ((0, 0),
                       (self.dither_temp_steps, self.dither_hum_steps),
                       (-self.dither_temp_steps, -self.dither_hum_steps)):
            ti = g.clamp_temp_index(t0 + dt)
            hi = g.clamp_hum_index(h0 + dh)
            while not self.in_band[activity, ti, hi] and (ti, hi) != (t0, h0):
                if abs(ti - t0) >= abs(hi - h0) and ti != t0:
                    ti += 1 if ti < t0 else -1
                else:
                    hi += 1 if hi < h0 else -1
            stops.append((ti, hi))
        return stops

    def dwell_schedule(self, activity: int,
                       mood: tuple[float, float] = (0.0, 0.0),
                       rng: Optional[np.random.Generator] = None
                       ) -> list[tuple[int, int]]:
        """Grid anchors the occupant samples while dwelling, in order.

        The first DWELL_BALANCED_SLOTS stops rotate through the three
        habitual anchors in fixed order; the remaining stops are drawn
        independently from the same anchors. Every visit therefore has
        the same haunts, but its own emphasis: how often each anchor
        came up this time is what keeps one person's episodes from being
        carbon copies of each other while still centering on the same
        signature. Without ``rng`` the whole schedule is the fixed
        rotation, which makes the composition exactly balanced and the
        visit reproducible (the variant used by tests and oracles).
        """
        anchors = self.dwell_anchors(activity, mood)
        balanced = (self.dwell_target if rng is None
                    else min(DWELL_BALANCED_SLOTS, self.dwell_target))
        schedule = [anchors[i % len(anchors)] for i in range(balanced)]
        if rng is not None and self.dwell_target > balanced:
            picks = rng.integers(len(anchors),
                                 size=self.dwell_target - balanced)
            schedule.extend(anchors[int(p)] for p in picks)
        return schedule

    def descent_move(self, activity: int, ti: int, hi: int) -> HumanAction:
        """Fallback for states the Q-table never visited: reduce |PMV|."""
        g = self.grid
        neighbors = (
            (HumanAction.INC_TEMP, g.clamp_temp_index(ti + 1), hi),
            (HumanAction.DEC_TEMP, g.clamp_temp_index(ti - 1), hi),
            (HumanAction.INC_HUM, ti, g.clamp_hum_index(hi + 1)),
            (HumanAction.DEC_HUM, ti, g.clamp_hum_index(hi - 1)),
        )
        best = HumanAction.CONTINUE
        best_score = abs(float(self.pmv_table[activity, ti, hi]))
        for action, nti, nhi in neighbors:
            if (nti, nhi) == (ti, hi):
                continue
            score = abs(float(self.pmv_table[activity, nti, nhi]))
            if score < best_score:
                best, best_score = action, score
        return best


class OccupantRuntime:
    """Per-episode driver for one occupant.

    Tracks the dwell count and the current comfort anchor; ``explore``
    adds epsilon-greedy noise to the out-of-band policy (pretraining).
    """

    def __init__(self, model: HumanModel, rng: np.random.Generator,
                 explore: float = 0.0):
        self.model = model
        self.rng = rng
        self.explore = explore
        self._activity = -1
        self._dwell = 0
        self._schedule: list[tuple[int, int]] = []
        self._visited: set[tuple[int, int]] = set()
        self._mood = [(float(rng.normal(0.0, model.mood_temp_sigma)),
                       float(rng.normal(0.0, model.mood_hum_sigma)))
                      for _ in range(model.n_activities)]

    def act(self, obs: ThermalObservation, env: SmartHomeEnv) -> HumanAction:
        if obs.activity != self._activity:
            self._activity = obs.activity
            self._dwell = 0
            self._schedule = self.model.dwell_schedule(
                obs.activity, self._mood[obs.activity], self.rng)
            self._visited.clear()
        if env.segment_exhausted:
            return HumanAction.LEAVE
        m = self.model
        if self._dwell >= m.dwell_target:
            return HumanAction.LEAVE
        a, ti, hi = m.grid.obs_index(obs)
        if m.in_band[a, ti, hi]:
            anchor = self._schedule[min(self._dwell,
                                        len(self._schedule) - 1)]
            if (abs(ti - anchor[0]) <= DWELL_TOLERANCE
                    and abs(hi - anchor[1]) <= DWELL_TOLERANCE):
                steps_left = env.max_segment_steps - env.segment_steps
                if steps_left <= LEAVE_RESERVE_STEPS:
                    return HumanAction.LEAVE
                return HumanAction.CONTINUE
            return self._step_toward(anchor, ti, hi)
        self._visited.add((ti, hi))
        if self.explore > 0 and self.rng.random() < self.explore:
            return HumanAction(int(self.rng.integers(4)))
        return self._correction_move(a, ti, hi)

    def _correction_move(self, a: int, ti: int, hi: int) -> HumanAction:
        """Greedy Q move, guarded against revisiting this segment's
        states so a half-trained table cannot trap the occupant."""
        m = self.model
        g = m.grid
        dests = {
            HumanAction.INC_TEMP: (g.clamp_temp_index(ti + 1), hi),
            HumanAction.DEC_TEMP: (g.clamp_temp_index(ti - 1), hi),
            HumanAction.INC_HUM: (ti, g.clamp_hum_index(hi + 1)),
            HumanAction.DEC_HUM: (ti, g.clamp_hum_index(hi - 1)),
        }
        by_pmv = sorted(
            (abs(float(m.pmv_table[a, d[0], d[1]])), int(act))
            for act, d in dests.items())
        candidates = []
        row = m.q[a, ti, hi, :4]
        # trust the table only once the band bonus has propagated here;
        # rows that have seen nothing but move penalties still mislead
        if row.max() > 0:
            candidates.append(HumanAction(int(np.argmax(row))))
        candidates.append(m.descent_move(a, ti, hi))
        candidates.extend(HumanAction(i) for _, i in by_pmv)
        for act in candidates:
            if act == HumanAction.CONTINUE:
                continue
            if dests[act] != (ti, hi) and dests[act] not in self._visited:
                return act
        return HumanAction(by_pmv[0][1])

    @staticmethod
    def _step_toward(anchor: tuple[int, int], ti: int, hi: int) -> HumanAction:
        dt = anchor[0] - ti
        dh = anchor[1] - hi
        if abs(dt) >= abs(dh) and dt != 0:
            return HumanAction.INC_TEMP if dt > 0 else HumanAction.DEC_TEMP
        return HumanAction.INC_HUM if dh > 0 else HumanAction.DEC_HUM

    def after(self, effective_action: HumanAction) -> None:
        """Notify the runtime of the action the environment applied."""
        if effective_action == HumanAction.CONTINUE:
            self._dwell += 1


def comfort_reward(obs: ThermalObservation, action, model: HumanModel) -> float:
    """In-band bonus at the observed point minus a charge for moving TH.

    ``obs`` carries the activity being performed and the TH point after
    the action; ``action`` may come from either agent (the four TH moves
    share the indices 0..3 in both action sets).
    """
    a, ti, hi = model.grid.obs_index(obs)
    reward = 1.0 if model.in_band[a, ti, hi] else 0.0
    if int(action) < 4:
        reward -= 0.1
    return reward


def pretrain(model: HumanModel, env: SmartHomeEnv, episodes: int = 350,
             seed: int = 0, alpha: float = 0.2, gamma: float = 0.95,
             epsilon: float = 1.0, epsilon_min: float = 0.05,
             epsilon_decay: float = 0.985) -> HumanModel:
    """Teach the occupant to correct discomfort, without any SHS present.

    Tabular Q-learning on the occupant's own reward, replayed backward
    at each episode end so the band bonus propagates along the whole
    trajectory. The in-band dwell behavior is scripted; exploration
    only touches the out-of-band branch. Returns the same model with
    its Q-table filled.
    """
    if env.n_activities != model.n_activities:
        raise ValueError("environment and model disagree on activity count")
    env.register(model.id)
    rng = np.random.default_rng(seed)
    eps = epsilon
    for _ in range(episodes):
        obs = env.reset(seed=int(rng.integers(2 ** 31 - 1)),
                        occupant_id=model.id)
        runtime = OccupantRuntime(model, rng, explore=eps)
        trajectory = []
        while not env.terminal:
            prev = obs
            obs = env.apply_action(runtime.act(obs, env))
            action = env.last_human_action
            runtime.after(action)
            r = comfort_reward(
                ThermalObservation(prev.activity, obs.temp, obs.hum),
                action, model)
            trajectory.append((
                model.grid.obs_index(prev), int(action), r,
                None if env.terminal else model.grid.obs_index(obs)))
        for idx, action, r, nxt in reversed(trajectory):
            target = r if nxt is None else (
                r + gamma * float(model.q[nxt].max()))
            cell = idx + (action,)
            model.q[cell] = (1.0 - alpha) * model.q[cell] + alpha * target
        eps = max(epsilon_min, eps * epsilon_decay)
    return model


def save_model(model: HumanModel, path) -> None:
    """Persist a trained occupant (Q-table plus defining parameters)."""
    np.savez(
        path,
        format_version=1,
        id=model.id,
        met_indices=np.asarray(model.met_indices),
        pmv_band=model.pmv_band,
        clo=model.params.clo,
        air_speed=model.params.air_speed,
        dither_temp_steps=model.dither_temp_steps,
        dither_hum_steps=model.dither_hum_steps,
        dwell_target=model.dwell_target,
        mood_temp_sigma=model.mood_temp_sigma,
        mood_hum_sigma=model.mood_hum_sigma,
        grid=np.asarray([
            model.grid.temp_min, model.grid.temp_max, model.grid.temp_step,
            model.grid.hum_min, model.grid.hum_max, model.grid.hum_step]),
        q=model.q,
    )


def load_model(path) -> HumanModel:
    with np.load(path) as data:
        g = data["grid"]
        model = HumanModel(
            id=str(data["id"]),
            met_indices=tuple(float(m) for m in data["met_indices"]),
            pmv_band=float(data["pmv_band"]),
            grid=ThermalGrid(*(float(x) for x in g)),
            params=ComfortParams(clo=float(data["clo"]),
                                 air_speed=float(data["air_speed"])),
            dither_temp_steps=int(data["dither_temp_steps"]),
            dither_hum_steps=int(data["dither_hum_steps"]),
            dwell_target=int(data["dwell_target"]),
            mood_temp_sigma=float(data["mood_temp_sigma"]),
            mood_hum_sigma=float(data["mood_hum_sigma"]),
        )
        model.q = data["q"].copy()
    return model
