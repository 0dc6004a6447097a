/**
 * End-to-end identification run: train the Q-networks on exported
 * training logs, enroll embedding pools from those same episodes,
 * then score identification on the exported evaluation logs.
 *
 * Results are written in the same per-episode CSV schema the
 * simulator's harness uses, so its comfort experiment can import the
 * baseline condition directly.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import type { EpisodeLog } from "./logs.js";
import { validSequence } from "./logs.js";
import {
  buildNetworks,
  embed,
  DEFAULT_NETWORK,
  type NetworkConfig,
  type QNetworks,
} from "./network.js";
import { trainOnLogs } from "./train.js";
import { DEFAULT_ALPHA, EmbeddingPool, identify } from "./identify.js";

export const NEW_LABEL = "new";

export interface RunConfig {
  network: NetworkConfig;
  trainingSteps: number;
  alpha: number;
  seed: number;
}

export const DEFAULT_RUN: RunConfig = {
  network: DEFAULT_NETWORK,
  trainingSteps: 420,
  alpha: DEFAULT_ALPHA,
  seed: 0,
};

export interface EpisodeRow {
  seed: number;
  phase: string;
  episode: number;
  true_occupant: string;
  pool_entry: string;
  predicted: string;
  is_new: number;
  correct: number;
  n_steps: number;
  reward_mean: number;
  th_changes_per_segment: number;
  steps_to_confidence: string;
  min_divergence: number | null;
}

export interface RunResult {
  lossHistory: number[];
  /** Pool entry id -> occupant name (majority of training matches). */
  mapping: Record<string, string>;
  rows: EpisodeRow[];
  accuracy: number;
  poolSize: number;
}

function rowFromLog(
  log: EpisodeLog,
  phase: string,
  entryId: string | null,
  predicted: string,
  isNew: boolean,
  minDivergence: number | null,
): EpisodeRow {
  const rewards = log.steps.map((s) => s.human_reward);
  const segments = Math.max(
    1,
    1 + Math.max(...log.steps.map((s) => s.activity)),
  );
  const thChanges = log.steps.filter((s) => s.human_action < 4).length;
  return {
    seed: log.seed,
    phase,
    episode: log.episode,
    true_occupant: log.true_occupant,
    pool_entry: entryId ?? "",
    predicted,
    is_new: isNew ? 1 : 0,
    correct: predicted === log.true_occupant ? 1 : 0,
    n_steps: log.steps.length,
    reward_mean:
      rewards.length > 0
        ? rewards.reduce((a, b) => a + b, 0) / rewards.length
        : 0,
    th_changes_per_segment: thChanges / segments,
    steps_to_confidence: "",
    min_divergence: minDivergence,
  };
}

/**
 * Enrolls every training episode into the pool (new person -> new
 * entry, match -> absorb) and returns the entry-to-occupant mapping
 * by majority attribution, ties resolved toward the earlier entry.
 */
export function enrollTrainingEpisodes(
  networks: QNetworks,
  pool: EmbeddingPool,
  trainLogs: EpisodeLog[],
  alpha: number,
): Record<string, string> {
  const attribution = new Map<string, Map<string, number>>();
  for (const log of trainLogs) {
    const sequence = validSequence(log);
    if (sequence.features.length === 0) continue;
    const embedding = embed(networks, sequence.features);
    const result = identify(pool, embedding, alpha);
    const entry = result.isNew
      ? pool.enroll(embedding)
      : (pool.absorb(result.entryId!, embedding),
        pool.entries.find((e) => e.id === result.entryId)!);
    if (!attribution.has(entry.id)) {
      attribution.set(entry.id, new Map());
    }
    const counts = attribution.get(entry.id)!;
    counts.set(
      log.true_occupant,
      (counts.get(log.true_occupant) ?? 0) + 1,
    );
  }
  const mapping: Record<string, string> = {};
  for (const [entryId, counts] of attribution) {
    let bestName = "";
    let bestCount = -1;
    for (const [name, count] of [...counts.entries()].sort()) {
      if (count > bestCount) {
        bestName = name;
        bestCount = count;
      }
    }
    mapping[entryId] = bestName;
  }
  return mapping;
}

/**
 * Full run: train the networks, enroll the pool from training logs,
 * identify every evaluation episode against the frozen pool.
 */
export async function runIdentification(
  trainLogs: EpisodeLog[],
  evalLogs: EpisodeLog[],
  config: RunConfig = DEFAULT_RUN,
): Promise<RunResult> {
  const networks = await buildNetworks(config.network, config.seed);
  const { lossHistory } = await trainOnLogs(
    networks,
    trainLogs,
    config.trainingSteps,
    config.seed,
  );
  const pool = new EmbeddingPool();
  const mapping = enrollTrainingEpisodes(
    networks,
    pool,
    trainLogs,
    config.alpha,
  );
  const rows: EpisodeRow[] = [];
  for (const log of evalLogs) {
    const sequence = validSequence(log);
    if (sequence.features.length === 0) {
      rows.push(rowFromLog(log, "baseline", null, NEW_LABEL, true, null));
      continue;
    }
    const embedding = embed(networks, sequence.features);
    const result = identify(pool, embedding, config.alpha);
    const predicted = result.isNew
      ? NEW_LABEL
      : (mapping[result.entryId!] ?? NEW_LABEL);
    const divergences = Object.values(result.divergences);
    rows.push(
      rowFromLog(
        log,
        "baseline",
        result.entryId,
        predicted,
        result.isNew,
        divergences.length > 0 ? Math.min(...divergences) : null,
      ),
    );
  }
  const accuracy =
    rows.length > 0
      ? rows.reduce((a, r) => a + r.correct, 0) / rows.length
      : 0;
  return {
    lossHistory,
    mapping,
    rows,
    accuracy,
    poolSize: pool.size,
  };
}

const CSV_FIELDS: (keyof EpisodeRow)[] = [
  "seed",
  "phase",
  "episode",
  "true_occupant",
  "pool_entry",
  "predicted",
  "is_new",
  "correct",
  "n_steps",
  "reward_mean",
  "th_changes_per_segment",
  "steps_to_confidence",
  "min_divergence",
];

/** Writes rows in the simulator harness's episode CSV schema. */
export function writeEpisodeCsv(rows: EpisodeRow[], path: string): void {
  mkdirSync(dirname(path), { recursive: true });
  const lines = [CSV_FIELDS.join(",")];
  for (const row of rows) {
    lines.push(
      CSV_FIELDS.map((field) => {
        const value = row[field];
        return value === null ? "" : String(value);
      }).join(","),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
}
