/**
 * Reader for the simulator's line-delimited episode logs and the
 * feature normalization that turns step traces into network inputs.
 *
 * This package talks to the simulator only through its exported
 * artifacts: the JSONL episode logs read here and the per-episode CSV
 * schema written by `experiment.ts`.
 */

import { readFileSync } from "node:fs";

/** One environment step as serialized by the simulator. */
export interface StepRecord {
  step: number;
  activity: number;
  temp: number;
  hum: number;
  human_action: number;
  valid: boolean;
  human_reward: number;
  shs_action: number | null;
  shs_reward: number | null;
  belief: number[];
}

/** One episode as serialized by the simulator. */
export interface EpisodeLog {
  episode: number;
  seed: number;
  true_occupant: string;
  variant: string | null;
  identified: string | null;
  is_new: boolean;
  pool_ids: string[];
  divergences: Record<string, number>;
  profile: Record<string, number> | null;
  steps: StepRecord[];
}

/** Grid bounds used to scale features into [0, 1]. */
export interface FeatureScale {
  tempMin: number;
  tempMax: number;
  humMin: number;
  humMax: number;
  nActivities: number;
}

export const DEFAULT_SCALE: FeatureScale = {
  tempMin: 15.0,
  tempMax: 30.0,
  humMin: 20.0,
  humMax: 70.0,
  nActivities: 3,
};

/** Action-space sizes shared with the simulator. */
export const N_SHS_ACTIONS = 5; // IncT, DecT, IncH, DecH, NoOp
export const N_HUMAN_ACTIONS = 6; // IncT, DecT, IncH, DecH, Continue, Leave
export const SHS_NOOP = 4;
export const FEATURES_PER_STEP = 5;

/**
 * Fits the temperature/humidity scale to the settled (valid) steps of
 * a corpus instead of the full grid bounds. Occupants differ only in
 * the narrow band of conditions they settle at, so scaling that band
 * to [0, 1] keeps the identity signal from being squeezed into a few
 * percent of the feature range. Out-of-band transient steps clamp.
 * Falls back to the grid bounds when a channel is degenerate.
 */
export function fitScale(logs: EpisodeLog[]): FeatureScale {
  let tLo = Infinity;
  let tHi = -Infinity;
  let hLo = Infinity;
  let hHi = -Infinity;
  for (const log of logs) {
    for (const s of log.steps) {
      if (!s.valid) continue;
      if (s.temp < tLo) tLo = s.temp;
      if (s.temp > tHi) tHi = s.temp;
      if (s.hum < hLo) hLo = s.hum;
      if (s.hum > hHi) hHi = s.hum;
    }
  }
  const scale = { ...DEFAULT_SCALE };
  if (tHi > tLo) {
    scale.tempMin = tLo;
    scale.tempMax = tHi;
  }
  if (hHi > hLo) {
    scale.humMin = hLo;
    scale.humMax = hHi;
  }
  return scale;
}

export function readEpisodeLogs(path: string): EpisodeLog[] {
  const text = readFileSync(path, "utf8");
  const logs: EpisodeLog[] = [];
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (trimmed.length === 0) continue;
    logs.push(JSON.parse(trimmed) as EpisodeLog);
  }
  return logs;
}

function scale01(value: number, lo: number, hi: number): number {
  const x = (value - lo) / (hi - lo);
  return Math.min(1, Math.max(0, x));
}

/**
 * Five features per step, each in [0, 1]: temperature, humidity,
 * activity, the occupant's action, and the agent's action (no-op when
 * the agent did not act).
 */
export function stepFeatures(
  step: StepRecord,
  scale: FeatureScale = DEFAULT_SCALE,
): number[] {
  const shs = step.shs_action === null ? SHS_NOOP : step.shs_action;
  return [
    scale01(step.temp, scale.tempMin, scale.tempMax),
    scale01(step.hum, scale.humMin, scale.humMax),
    scale.nActivities > 1
      ? scale01(step.activity, 0, scale.nActivities - 1)
      : 0,
    scale01(step.human_action, 0, N_HUMAN_ACTIONS - 1),
    scale01(shs, 0, N_SHS_ACTIONS - 1),
  ];
}

/** Variable-length feature sequence built from one episode. */
export interface SequenceSample {
  /** [steps][5] normalized features. */
  features: number[][];
  trueOccupant: string;
  episode: number;
  seed: number;
}

/**
 * The full step sequence of an episode (used for Q-learning replay).
 */
export function episodeSequence(
  log: EpisodeLog,
  scale: FeatureScale = DEFAULT_SCALE,
): SequenceSample {
  return {
    features: log.steps.map((s) => stepFeatures(s, scale)),
    trueOccupant: log.true_occupant,
    episode: log.episode,
    seed: log.seed,
  };
}

/**
 * The settled-sample sequence of an episode: only steps where the
 * occupant made no thermostat change. Identity lives in where people
 * settle, so embeddings are computed from these steps alone.
 */
export function validSequence(
  log: EpisodeLog,
  scale: FeatureScale = DEFAULT_SCALE,
): SequenceSample {
  return {
    features: log.steps
      .filter((s) => s.valid)
      .map((s) => stepFeatures(s, scale)),
    trueOccupant: log.true_occupant,
    episode: log.episode,
    seed: log.seed,
  };
}

/** One Q-learning transition reconstructed from a logged step. */
export interface Transition {
  /** Feature window ending at the step the agent acted on. */
  window: number[][];
  action: number;
  reward: number;
  /** Window after the agent's action, or null on terminal steps. */
  nextWindow: number[][] | null;
}

/**
 * Replay transitions from an episode: every step where the agent
 * acted becomes (window -> action -> reward -> next window), with
 * fixed-length windows (left-padded by repeating the first step) so
 * batches stack.
 */
export function episodeTransitions(
  log: EpisodeLog,
  windowLength: number,
  scale: FeatureScale = DEFAULT_SCALE,
): Transition[] {
  const features = log.steps.map((s) => stepFeatures(s, scale));
  const out: Transition[] = [];
  for (let t = 0; t < log.steps.length; t++) {
    const step = log.steps[t];
    if (step.shs_action === null || step.shs_reward === null) continue;
    out.push({
      window: windowEndingAt(features, t, windowLength),
      action: step.shs_action,
      reward: step.shs_reward,
      nextWindow:
        t + 1 < log.steps.length
          ? windowEndingAt(features, t + 1, windowLength)
          : null,
    });
  }
  return out;
}

function windowEndingAt(
  features: number[][],
  t: number,
  length: number,
): number[][] {
  const window: number[][] = [];
  for (let i = t - length + 1; i <= t; i++) {
    window.push(features[Math.max(0, i)]);
  }
  return window;
}
