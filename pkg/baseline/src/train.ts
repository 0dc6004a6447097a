/**
 * Offline Q-learning over logged transitions: replay minibatches,
 * regress the taken action's value toward r + discount * max target-Q
 * (terminal steps toward the raw reward), and sync the target network
 * every few optimization steps.
 */

import * as tf from "@tensorflow/tfjs";

import type { EpisodeLog, FeatureScale } from "./logs.js";
import { DEFAULT_SCALE, episodeTransitions, type Transition } from "./logs.js";
import { syncTarget, type QNetworks } from "./network.js";

/** Small deterministic RNG so replay sampling is reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface TrainResult {
  /** Mean squared error of each optimization step, in order. */
  lossHistory: number[];
}

export class DivergentLossError extends Error {}

/**
 * Computes the regression targets for one minibatch: the current
 * predictions with the taken action's entry replaced by
 * r + discount * max target-Q(next window), or by r alone on
 * terminal transitions.
 */
export function batchTargets(
  networks: QNetworks,
  batch: Transition[],
): number[][] {
  return tf.tidy(() => {
    const windows = tf.tensor3d(batch.map((t) => t.window));
    const predictions = (
      networks.train.predict(windows) as tf.Tensor2D
    ).arraySync();
    const withNext = batch.filter((t) => t.nextWindow !== null);
    let nextMax: number[] = [];
    if (withNext.length > 0) {
      const nextWindows = tf.tensor3d(withNext.map((t) => t.nextWindow!));
      nextMax = Array.from(
        (networks.target.predict(nextWindows) as tf.Tensor2D)
          .max(1)
          .dataSync(),
      );
    }
    let j = 0;
    return batch.map((t, i) => {
      const target = predictions[i].slice();
      target[t.action] =
        t.nextWindow === null
          ? t.reward
          : t.reward + networks.config.discount * nextMax[j++];
      return target;
    });
  });
}

/** One optimization step on a batch; returns the step's loss. */
export async function trainStep(
  networks: QNetworks,
  batch: Transition[],
): Promise<number> {
  const targets = batchTargets(networks, batch);
  const x = tf.tensor3d(batch.map((t) => t.window));
  const y = tf.tensor2d(targets);
  const loss = (await networks.train.trainOnBatch(x, y)) as number;
  x.dispose();
  y.dispose();
  return loss;
}

/**
 * Replays transitions from the given logs for `steps` minibatches.
 * The target network is re-synced every `targetSyncInterval` steps.
 * Throws DivergentLossError if the loss stops being finite.
 */
export async function trainOnLogs(
  networks: QNetworks,
  logs: EpisodeLog[],
  steps: number,
  seed = 0,
  scale: FeatureScale = DEFAULT_SCALE,
): Promise<TrainResult> {
  const transitions = logs.flatMap((log) =>
    episodeTransitions(log, networks.config.windowLength, scale),
  );
  if (transitions.length === 0) {
    throw new Error("no agent transitions in the provided logs");
  }
  const rng = mulberry32(seed);
  const lossHistory: number[] = [];
  for (let step = 0; step < steps; step++) {
    const batch: Transition[] = [];
    for (let i = 0; i < networks.config.batchSize; i++) {
      batch.push(transitions[Math.floor(rng() * transitions.length)]);
    }
    const loss = await trainStep(networks, batch);
    if (!Number.isFinite(loss)) {
      throw new DivergentLossError(
        `loss diverged at step ${step}: ${loss}`,
      );
    }
    lossHistory.push(loss);
    if ((step + 1) % networks.config.targetSyncInterval === 0) {
      syncTarget(networks);
    }
  }
  return { lossHistory };
}
