export {
  DEFAULT_SCALE,
  FEATURES_PER_STEP,
  N_HUMAN_ACTIONS,
  N_SHS_ACTIONS,
  SHS_NOOP,
  episodeSequence,
  episodeTransitions,
  readEpisodeLogs,
  stepFeatures,
  validSequence,
} from "./logs.js";
export type {
  EpisodeLog,
  FeatureScale,
  SequenceSample,
  StepRecord,
  Transition,
} from "./logs.js";
export { ensureBackend } from "./backend.js";
export { kolmogorovProb, ksTest } from "./ks.js";
export type { KsResult } from "./ks.js";
export {
  DEFAULT_NETWORK,
  buildNetworks,
  embed,
  syncTarget,
} from "./network.js";
export type { NetworkConfig, QNetworks } from "./network.js";
export {
  DivergentLossError,
  batchTargets,
  mulberry32,
  trainOnLogs,
  trainStep,
} from "./train.js";
export type { TrainResult } from "./train.js";
export {
  DEFAULT_ALPHA,
  EmbeddingPool,
  identify,
} from "./identify.js";
export type { IdentifyResult, PoolEntry } from "./identify.js";
export {
  DEFAULT_RUN,
  NEW_LABEL,
  enrollTrainingEpisodes,
  runIdentification,
  writeEpisodeCsv,
} from "./experiment.js";
export type { EpisodeRow, RunConfig, RunResult } from "./experiment.js";
