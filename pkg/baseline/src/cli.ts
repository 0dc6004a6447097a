#!/usr/bin/env node
/**
 * Command-line entry point: train on exported training logs, identify
 * evaluation episodes, and write results (CSV rows in the simulator's
 * schema plus a JSON summary).
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { readEpisodeLogs } from "./logs.js";
import { DEFAULT_NETWORK } from "./network.js";
import { DEFAULT_ALPHA } from "./identify.js";
import {
  DEFAULT_RUN,
  runIdentification,
  writeEpisodeCsv,
} from "./experiment.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command(
      "run",
      "train on exported logs and score identification",
      (y) =>
        y
          .option("train-logs", {
            type: "string",
            demandOption: true,
            describe: "JSONL episode logs from the simulator's train step",
          })
          .option("eval-logs", {
            type: "string",
            demandOption: true,
            describe: "JSONL episode logs from the simulator's eval step",
          })
          .option("out", { type: "string", demandOption: true })
          .option("steps", {
            type: "number",
            default: DEFAULT_RUN.trainingSteps,
            describe: "optimization steps",
          })
          .option("alpha", { type: "number", default: DEFAULT_ALPHA })
          .option("learning-rate", {
            type: "number",
            default: DEFAULT_NETWORK.learningRate,
          })
          .option("seed", { type: "number", default: 0 }),
    )
    .demandCommand(1)
    .strict()
    .parse();

  const trainLogs = readEpisodeLogs(args["train-logs"] as string);
  const evalLogs = readEpisodeLogs(args["eval-logs"] as string);
  const result = await runIdentification(trainLogs, evalLogs, {
    network: {
      ...DEFAULT_NETWORK,
      learningRate: args["learning-rate"] as number,
    },
    trainingSteps: args.steps as number,
    alpha: args.alpha as number,
    seed: args.seed as number,
  });

  const out = args.out as string;
  mkdirSync(out, { recursive: true });
  writeEpisodeCsv(result.rows, join(out, "baseline_episodes.csv"));
  const k = Math.max(1, Math.floor(result.lossHistory.length / 5));
  const summary = {
    episodes: result.rows.length,
    accuracy: result.accuracy,
    pool_size: result.poolSize,
    mapping: result.mapping,
    loss_first: mean(result.lossHistory.slice(0, k)),
    loss_last: mean(result.lossHistory.slice(-k)),
    loss_history: result.lossHistory,
  };
  writeFileSync(
    join(out, "summary.json"),
    JSON.stringify(summary, null, 2),
  );
  console.log(
    `identified ${result.rows.length} episodes, accuracy ` +
      `${result.accuracy.toFixed(3)}, pool size ${result.poolSize}, ` +
      `loss ${summary.loss_first.toFixed(4)} -> ` +
      `${summary.loss_last.toFixed(4)}`,
  );
  return 0;
}

function mean(xs: number[]): number {
  return xs.length > 0 ? xs.reduce((a, b) => a + b, 0) / xs.length : 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(hideBin(process.argv)).then(
    (code) => process.exit(code),
    (err) => {
      console.error(err);
      process.exit(1);
    },
  );
}
