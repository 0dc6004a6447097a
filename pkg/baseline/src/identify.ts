/**
 * Identity matching over sequence embeddings.
 *
 * Each discovered occupant keeps the pooled component values of the
 * embeddings attributed to them. A new episode's embedding is
 * compared against every entry with the two-sample KS test: the
 * closest entry (smallest statistic) wins, unless even this entry's
 * p-value says the distributions differ (p <= alpha), in which case
 * the episode belongs to a new person.
 */

import { ksTest } from "./ks.js";

/** Significance level: p <= alpha means "different person". */
export const DEFAULT_ALPHA = 0.18;

export interface PoolEntry {
  id: string;
  /** Pooled embedding components from this entry's episodes. */
  samples: number[];
  episodes: number;
}

export class EmbeddingPool {
  entries: PoolEntry[] = [];

  get size(): number {
    return this.entries.length;
  }

  enroll(embedding: number[]): PoolEntry {
    const entry: PoolEntry = {
      id: `user-${this.entries.length}`,
      samples: [...embedding],
      episodes: 1,
    };
    this.entries.push(entry);
    return entry;
  }

  /** Adds a matched episode's embedding to an enrolled entry. */
  absorb(id: string, embedding: number[]): void {
    const entry = this.entries.find((e) => e.id === id);
    if (!entry) throw new Error(`unknown pool entry: ${id}`);
    entry.samples.push(...embedding);
    entry.episodes += 1;
  }
}

export interface IdentifyResult {
  isNew: boolean;
  /** Closest entry id (also set when the verdict is "new"), or null
   *  for an empty pool. */
  entryId: string | null;
  statistic: number | null;
  pValue: number | null;
  /** KS statistic against every entry, keyed by entry id. */
  divergences: Record<string, number>;
}

/**
 * Matches an embedding against the pool: argmin-statistic entry, with
 * p <= alpha at that entry (or an empty pool) meaning a new person.
 */
export function identify(
  pool: EmbeddingPool,
  embedding: number[],
  alpha: number = DEFAULT_ALPHA,
): IdentifyResult {
  if (pool.size === 0) {
    return {
      isNew: true,
      entryId: null,
      statistic: null,
      pValue: null,
      divergences: {},
    };
  }
  const divergences: Record<string, number> = {};
  let best: { id: string; statistic: number; pValue: number } | null = null;
  for (const entry of pool.entries) {
    const { statistic, pValue } = ksTest(entry.samples, embedding);
    divergences[entry.id] = statistic;
    if (best === null || statistic < best.statistic) {
      best = { id: entry.id, statistic, pValue };
    }
  }
  return {
    isNew: best!.pValue <= alpha,
    entryId: best!.id,
    statistic: best!.statistic,
    pValue: best!.pValue,
    divergences,
  };
}
