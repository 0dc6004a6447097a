/**
 * The recurrent Q-network pair (train + target) and sequence
 * embeddings.
 *
 * Architecture: 1-d convolution (32 filters, kernel 1, stride 1,
 * ReLU) over the per-step features, an LSTM with 175 cells (tanh),
 * and a ReLU dense head with one output per agent action. The
 * embedding of a sequence is the LSTM's final hidden state.
 */

import * as tf from "@tensorflow/tfjs";

import { ensureBackend } from "./backend.js";
import { FEATURES_PER_STEP } from "./logs.js";

export interface NetworkConfig {
  convFilters: number;
  kernelSize: number;
  strides: number;
  lstmUnits: number;
  nActions: number;
  learningRate: number;
  /** Optimization steps between target-network syncs. */
  targetSyncInterval: number;
  /** Floor for epsilon-greedy action selection when the policy acts. */
  epsilonFloor: number;
  discount: number;
  /** Replay window length (steps per training sample). */
  windowLength: number;
  batchSize: number;
}

export const DEFAULT_NETWORK: NetworkConfig = {
  convFilters: 32,
  kernelSize: 1,
  strides: 1,
  lstmUnits: 175,
  nActions: 5,
  learningRate: 0.0013,
  targetSyncInterval: 7,
  epsilonFloor: 0.005,
  discount: 0.98,
  windowLength: 8,
  batchSize: 32,
};

export interface QNetworks {
  train: tf.LayersModel;
  target: tf.LayersModel;
  /** Maps an input sequence to the LSTM's final hidden state. */
  embedder: tf.LayersModel;
  config: NetworkConfig;
}

function buildModel(
  config: NetworkConfig,
  seed: number,
): { model: tf.LayersModel; embedder: tf.LayersModel } {
  if (config.kernelSize !== 1 || config.strides !== 1) {
    throw new Error(
      "only kernel size 1 with stride 1 is supported (the pointwise form)",
    );
  }
  const input = tf.input({ shape: [null, FEATURES_PER_STEP] });
  // A 1-d convolution with kernel size 1 and stride 1 is exactly a
  // dense projection applied at every step; the dense form is used
  // because the wasm backend has no conv1d gradient kernels.
  const conv = tf.layers
    .dense({
      units: config.convFilters,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
    })
    .apply(input) as tf.SymbolicTensor;
  const lstm = tf.layers
    .lstm({
      units: config.lstmUnits,
      activation: "tanh",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
      recurrentInitializer: tf.initializers.orthogonal({
        gain: 1,
        seed: seed + 2,
      }),
    })
    .apply(conv) as tf.SymbolicTensor;
  const head = tf.layers
    .dense({
      units: config.nActions,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 3 }),
    })
    .apply(lstm) as tf.SymbolicTensor;
  const model = tf.model({ inputs: input, outputs: head });
  const embedder = tf.model({ inputs: input, outputs: lstm });
  return { model, embedder };
}

/**
 * Builds the train/target pair with identical initial parameters and
 * the embedding view of the train network.
 */
export async function buildNetworks(
  config: NetworkConfig = DEFAULT_NETWORK,
  seed = 0,
): Promise<QNetworks> {
  await ensureBackend();
  const { model: train, embedder } = buildModel(config, seed);
  const { model: target } = buildModel(config, seed);
  train.compile({
    optimizer: tf.train.adam(config.learningRate),
    loss: "meanSquaredError",
  });
  syncTarget({ train, target });
  return { train, target, embedder, config };
}

/** Copies the train network's parameters into the target network. */
export function syncTarget(networks: {
  train: tf.LayersModel;
  target: tf.LayersModel;
}): void {
  networks.target.setWeights(networks.train.getWeights());
}

/**
 * Embedding of a settled-sample sequence: the LSTM hidden state after
 * the last step. Returns `lstmUnits` values.
 */
export function embed(
  networks: QNetworks,
  features: number[][],
): number[] {
  if (features.length === 0) {
    throw new Error("cannot embed an empty sequence");
  }
  return tf.tidy(() => {
    const input = tf.tensor3d([features]);
    const out = networks.embedder.predict(input) as tf.Tensor2D;
    return Array.from(out.dataSync());
  });
}
