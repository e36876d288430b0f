/**
 * CLI: produce manifest directories for the segmentation engine.
 *
 *   node dist/cli.js --out <dir> [--samples N] [--seed S]
 *
 * This build ships the deterministic synthetic backend; a production
 * backend plugs in behind the same ModelBackend interface with model
 * checkpoints referenced by identifier.
 */

import { SyntheticBackend } from "./backend.js";
import { makeScene } from "./dataset.js";
import { extractDataset } from "./extractor.js";
import { DEFAULT_CONFIG } from "./schedule.js";

function argValue(argv: string[], flag: string, fallback: string): string {
  const i = argv.indexOf(flag);
  return i >= 0 && i + 1 < argv.length ? argv[i + 1] : fallback;
}

export function main(argv: string[]): number {
  const out = argValue(argv, "--out", "");
  if (!out) {
    console.error("usage: cli --out <dir> [--samples N] [--seed S]");
    return 1;
  }
  const samples = parseInt(argValue(argv, "--samples", "5"), 10);
  const seed = parseInt(argValue(argv, "--seed", "1"), 10);
  const scenes = Array.from({ length: samples }, (_, i) => makeScene(seed, i));
  const batchPath = extractDataset(scenes, new SyntheticBackend(), out, DEFAULT_CONFIG);
  console.log(batchPath);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
