/**
 * Synthetic source archives with the real datasets' structure at the
 * real datasets' scale where the acceptance numbers demand it (MNIST
 * sample counts, 50 alphabets, 40x10 faces), tiny everywhere else.
 */

import AdmZip from "adm-zip";
import { spawnSync } from "child_process";
import { mkdirSync, readdirSync, statSync, writeFileSync } from "fs";
import { join, relative } from "path";
import { PNG } from "pngjs";
import { gzipSync } from "zlib";
import { sha256File } from "../src/hash.js";
import { IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC } from "../src/idx.js";

// ------------------------------------------------------------------ idx --

export function idxImages(count: number, rows = 28, cols = 28): Buffer {
  const buf = Buffer.alloc(16 + count * rows * cols);
  buf.writeUInt32BE(IDX_IMAGES_MAGIC, 0);
  buf.writeUInt32BE(count, 4);
  buf.writeUInt32BE(rows, 8);
  buf.writeUInt32BE(cols, 12);
  // constant plate per image, value varying with the index
  for (let i = 0; i < count; i++) {
    buf.fill((i * 37) % 251, 16 + i * rows * cols, 16 + (i + 1) * rows * cols);
  }
  return buf;
}

export function idxLabels(count: number): Buffer {
  const buf = Buffer.alloc(8 + count);
  buf.writeUInt32BE(IDX_LABELS_MAGIC, 0);
  buf.writeUInt32BE(count, 4);
  for (let i = 0; i < count; i++) buf[8 + i] = i % 10;
  return buf;
}

/** The four gzipped IDX archives, 60000 train + 10000 probe samples. */
export function buildMnistArchives(dir: string, train = 60000, probe = 10000): void {
  mkdirSync(dir, { recursive: true });
  const gz = (b: Buffer) => gzipSync(b, { level: 1 });
  writeFileSync(join(dir, "train-images-idx3-ubyte.gz"), gz(idxImages(train)));
  writeFileSync(join(dir, "train-labels-idx1-ubyte.gz"), gz(idxLabels(train)));
  writeFileSync(join(dir, "t10k-images-idx3-ubyte.gz"), gz(idxImages(probe)));
  writeFileSync(join(dir, "t10k-labels-idx1-ubyte.gz"), gz(idxLabels(probe)));
}

// ------------------------------------------------------------- omniglot --

/** Small white-page PNG with a dark deterministic stroke. */
export function glyphPng(seed: number, size = 8): Buffer {
  const png = new PNG({ width: size, height: size });
  for (let i = 0; i < size * size; i++) {
    const v = (i + seed) % 5 === 0 ? 20 : 240;
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  return PNG.sync.write(png);
}

export const CHARS_PER_ALPHABET = 2;
export const DRAWERS_PER_CHAR = 2;

function omniglotZip(root: string, alphabets: string[]): Buffer {
  const zip = new AdmZip();
  let seed = 0;
  for (const alphabet of alphabets) {
    for (let c = 1; c <= CHARS_PER_ALPHABET; c++) {
      for (let d = 1; d <= DRAWERS_PER_CHAR; d++) {
        const name = `${root}/${alphabet}/character${String(c).padStart(2, "0")}/0001_${String(d).padStart(2, "0")}.png`;
        zip.addFile(name, glyphPng(seed++));
      }
    }
  }
  return zip.toBuffer();
}

export function alphabetName(i: number): string {
  return `Alphabet_${String(i).padStart(2, "0")}`;
}

/**
 * Source zips pre-split 30/20 like the published archives, so the
 * converter's sorted 40/10 re-partition has to move ten alphabets from
 * the evaluation archive into the background split.
 */
export function buildOmniglotArchives(dir: string, total = 50, backgroundZip = 30): void {
  mkdirSync(dir, { recursive: true });
  const names = Array.from({ length: total }, (_, i) => alphabetName(i));
  writeFileSync(
    join(dir, "images_background.zip"),
    omniglotZip("images_background", names.slice(0, backgroundZip)),
  );
  writeFileSync(
    join(dir, "images_evaluation.zip"),
    omniglotZip("images_evaluation", names.slice(backgroundZip)),
  );
}

// ------------------------------------------------------------------ orl --

/** Face PGM with a comment-bearing, non-canonical header. */
export function orlPgm(cls: number, idx: number, w = 6, h = 7): Buffer {
  const pixels = Buffer.alloc(w * h);
  for (let i = 0; i < pixels.length; i++) pixels[i] = (cls * 16 + idx + i * 3) % 256;
  return Buffer.concat([Buffer.from(`P5\n# fixture\n${w} ${h}\n255\n`, "latin1"), pixels]);
}

export function buildOrlArchive(dir: string, opts?: { dropOne?: boolean }): void {
  mkdirSync(dir, { recursive: true });
  const zip = new AdmZip();
  zip.addFile("att_faces/README", Buffer.from("fixture archive\n"));
  for (let cls = 1; cls <= 40; cls++) {
    const n = opts?.dropOne && cls === 40 ? 9 : 10;
    for (let idx = 1; idx <= n; idx++) {
      zip.addFile(`att_faces/s${cls}/${idx}.pgm`, orlPgm(cls, idx));
    }
  }
  writeFileSync(join(dir, "att_faces.zip"), zip.toBuffer());
}

// -------------------------------------------------------------- helpers --

export interface ValidateResult {
  code: number;
  stdout: string;
  stderr: string;
}

/** Run the training package's manifest validator against a manifest. */
export function validateManifest(manifestPath: string): ValidateResult {
  const res = spawnSync("python3", ["-m", "absgen.cli", "validate-manifest", manifestPath], {
    encoding: "utf8",
  });
  if (res.error) throw res.error;
  return { code: res.status ?? -1, stdout: res.stdout, stderr: res.stderr };
}

/** Map of relative path -> sha256 for every file under root. */
export function hashTree(root: string): Record<string, string> {
  const out: Record<string, string> = {};
  const walk = (dir: string) => {
    for (const entry of readdirSync(dir).sort()) {
      const full = join(dir, entry);
      if (statSync(full).isDirectory()) walk(full);
      else out[relative(root, full).split("\\").join("/")] = sha256File(full);
    }
  };
  walk(root);
  return out;
}
