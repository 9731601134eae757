/**
 * dataset-prep: fetch public datasets and convert them into the
 * IDX/PGM + manifest layout the training package consumes.
 *
 * Usage:
 *   dataset-prep fetch   <mnist|omniglot|orl> [options]
 *   dataset-prep convert <mnist|omniglot|orl> [options]
 *   dataset-prep all     <mnist|omniglot|orl> [options]
 *
 * Options:
 *   --out-dir DIR      output root (default: data); archives live in
 *                      DIR/archives/<dataset>, converted trees in DIR/<dataset>
 *   --source-url URL   base URL overriding the default mirror for fetch
 *   --checksums FILE   pinned sha256 values {archiveName: hex}; otherwise the
 *                      first fetch records hashes in archives.lock.json
 *
 * Everything after fetch runs offline; pre-placed archives are used
 * as-is.  Conversion is deterministic: re-running produces
 * byte-identical trees and manifests.
 */

import { join } from "path";
import { convertMnist } from "./convert/mnist.js";
import { convertOmniglot } from "./convert/omniglot.js";
import { convertOrl } from "./convert/orl.js";
import { DatasetName, fetchDataset } from "./fetch.js";

const CONVERTERS: Record<DatasetName, (archiveDir: string, outDir: string) => string> = {
  mnist: convertMnist,
  omniglot: convertOmniglot,
  orl: convertOrl,
};

export interface Args {
  command: "fetch" | "convert" | "all";
  dataset: DatasetName;
  outDir: string;
  sourceUrl?: string;
  checksums?: string;
}

export class UsageError extends Error {}

export const USAGE =
  "usage: dataset-prep <fetch|convert|all> <mnist|omniglot|orl> " +
  "[--out-dir DIR] [--source-url URL] [--checksums FILE]";

/** Parse argv; returns "help" for -h/--help/no args, throws UsageError on bad input. */
export function parseArgs(argv: string[]): Args | "help" {
  const [command, dataset, ...rest] = argv;
  if (!command || command === "-h" || command === "--help") return "help";
  if (!["fetch", "convert", "all"].includes(command)) {
    throw new UsageError(`unknown command ${command}`);
  }
  if (!dataset || !(dataset in CONVERTERS)) {
    throw new UsageError(`unknown dataset ${dataset ?? "(missing)"}`);
  }
  const args: Args = {
    command: command as Args["command"],
    dataset: dataset as DatasetName,
    outDir: "data",
  };
  for (let i = 0; i < rest.length; i += 2) {
    const value = rest[i + 1];
    if (value === undefined) throw new UsageError(`${rest[i]} needs a value`);
    if (rest[i] === "--out-dir") args.outDir = value;
    else if (rest[i] === "--source-url") args.sourceUrl = value;
    else if (rest[i] === "--checksums") args.checksums = value;
    else throw new UsageError(`unknown option ${rest[i]}`);
  }
  return args;
}

export async function run(args: Args): Promise<void> {
  const archiveDir = join(args.outDir, "archives", args.dataset);
  if (args.command !== "convert") {
    await fetchDataset(args.dataset, {
      archiveDir,
      sourceUrl: args.sourceUrl,
      checksumsPath: args.checksums,
    });
  }
  if (args.command !== "fetch") {
    const manifest = CONVERTERS[args.dataset](archiveDir, join(args.outDir, args.dataset));
    console.log(`wrote ${manifest}`);
  }
}

export async function main(argv: string[]): Promise<number> {
  let args: Args | "help";
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      console.error(USAGE);
      return 1;
    }
    throw err;
  }
  if (args === "help") {
    console.log(USAGE);
    return 0;
  }
  try {
    await run(args);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}
