import { readdirSync, statSync, writeFileSync } from "fs";
import { join, relative } from "path";
import { sha256File } from "./hash.js";

/** The manifest schema the training side consumes. */
export interface Manifest {
  name: string;
  format: "idx" | "pgm";
  splits: Record<string, string[]>;
  sha256: Record<string, string>;
  conversion?: Record<string, unknown>;
  counts?: Record<string, number>;
  alphabets?: Record<string, string[]>;
}

function listFiles(root: string): string[] {
  const out: string[] = [];
  const walk = (dir: string) => {
    for (const entry of readdirSync(dir).sort()) {
      const full = join(dir, entry);
      if (statSync(full).isDirectory()) walk(full);
      else out.push(full);
    }
  };
  walk(root);
  return out;
}

/** Recursively sort object keys so the emitted JSON is byte-stable. */
function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value && typeof value === "object") {
    const sorted: Record<string, unknown> = {};
    for (const key of Object.keys(value).sort()) {
      sorted[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return sorted;
  }
  return value;
}

/**
 * Hash every file under the split entries of `datasetDir` and write
 * manifest.json next to them.  Paths in the manifest are POSIX-relative
 * to the manifest's own directory, which is what the consumer expects.
 */
export function writeManifest(
  datasetDir: string,
  manifest: Omit<Manifest, "sha256">,
): string {
  const checksums: Record<string, string> = {};
  const targets = new Set<string>();
  for (const entries of Object.values(manifest.splits)) {
    for (const entry of entries) targets.add(entry);
  }
  for (const entry of [...targets].sort()) {
    const full = join(datasetDir, entry);
    const files = statSync(full).isDirectory() ? listFiles(full) : [full];
    for (const file of files) {
      const rel = relative(datasetDir, file).split("\\").join("/");
      checksums[rel] = sha256File(file);
    }
  }
  const full: Manifest = { ...manifest, sha256: checksums };
  const path = join(datasetDir, "manifest.json");
  writeFileSync(path, JSON.stringify(sortKeys(full), null, 2) + "\n");
  return path;
}
