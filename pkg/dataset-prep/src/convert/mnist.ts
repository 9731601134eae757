import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { join } from "path";
import { gunzipSync } from "zlib";
import { inspectIdx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC } from "../idx.js";
import { writeManifest } from "../manifest.js";

const SOURCES = [
  { archive: "train-images-idx3-ubyte.gz", out: "train-images.idx", magic: IDX_IMAGES_MAGIC },
  { archive: "train-labels-idx1-ubyte.gz", out: "train-labels.idx", magic: IDX_LABELS_MAGIC },
  { archive: "t10k-images-idx3-ubyte.gz", out: "probe-images.idx", magic: IDX_IMAGES_MAGIC },
  { archive: "t10k-labels-idx1-ubyte.gz", out: "probe-labels.idx", magic: IDX_LABELS_MAGIC },
];

/** Gunzip the four IDX archives, sanity-check them, emit the manifest. */
export function convertMnist(archiveDir: string, outDir: string): string {
  mkdirSync(outDir, { recursive: true });
  const counts: Record<string, number> = {};
  for (const src of SOURCES) {
    const raw = gunzipSync(readFileSync(join(archiveDir, src.archive)));
    const info = inspectIdx(raw, src.archive);
    if (info.magic !== src.magic) {
      throw new Error(
        `${src.archive}: expected magic 0x${src.magic.toString(16).padStart(8, "0")}, ` +
          `got 0x${info.magic.toString(16).padStart(8, "0")}`,
      );
    }
    counts[src.out] = info.count;
    writeFileSync(join(outDir, src.out), raw);
  }
  for (const split of ["train", "probe"]) {
    if (counts[`${split}-images.idx`] !== counts[`${split}-labels.idx`]) {
      throw new Error(
        `${split}: ${counts[`${split}-images.idx`]} images vs ` +
          `${counts[`${split}-labels.idx`]} labels`,
      );
    }
  }
  const train = counts["train-images.idx"];
  const probe = counts["probe-images.idx"];
  return writeManifest(outDir, {
    name: "mnist",
    format: "idx",
    splits: {
      train: ["train-images.idx", "train-labels.idx"],
      probe: ["probe-images.idx", "probe-labels.idx"],
    },
    counts: { train, probe, total: train + probe },
    conversion: { source: "idx-gzip passthrough" },
  });
}
