import AdmZip from "adm-zip";
import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";
import { writeManifest } from "../manifest.js";
import { writePgm } from "../pgm.js";
import { BINARIZE_THRESHOLD, GRAYSCALE, pngToInkPgm } from "../png.js";

const BACKGROUND_ALPHABETS = 40;
const TOTAL_ALPHABETS = 50;

interface Glyph {
  alphabet: string;
  character: string;
  file: string;
  data: Buffer;
}

function readZipGlyphs(zipPath: string): Glyph[] {
  const glyphs: Glyph[] = [];
  for (const entry of new AdmZip(zipPath).getEntries()) {
    if (entry.isDirectory) continue;
    const name = entry.entryName;
    if (name.includes("..") || name.startsWith("/")) {
      throw new Error(`${zipPath}: refusing suspicious entry path ${name}`);
    }
    const parts = name.split("/").filter((p) => p.length > 0);
    // <zip root>/<alphabet>/<character>/<image>.png
    if (parts.length !== 4 || !parts[3].toLowerCase().endsWith(".png")) {
      throw new Error(`${zipPath}: unexpected archive entry ${name}`);
    }
    glyphs.push({
      alphabet: parts[1],
      character: parts[2],
      file: parts[3].replace(/\.png$/i, ".pgm"),
      data: entry.getData(),
    });
  }
  return glyphs;
}

/**
 * Merge the two source zips into one 50-alphabet tree and split it
 * 40 background / 10 evaluation by sorted alphabet name.  (The source
 * archives arrive pre-split 30/20; the 40/10 tagging is this tool's
 * fixed, order-deterministic re-partition.)
 */
export function convertOmniglot(archiveDir: string, outDir: string): string {
  const glyphs = [
    ...readZipGlyphs(join(archiveDir, "images_background.zip")),
    ...readZipGlyphs(join(archiveDir, "images_evaluation.zip")),
  ];
  const alphabets = [...new Set(glyphs.map((g) => g.alphabet))].sort();
  if (alphabets.length !== TOTAL_ALPHABETS) {
    throw new Error(
      `expected ${TOTAL_ALPHABETS} alphabets across both archives, found ${alphabets.length}`,
    );
  }
  const background = alphabets.slice(0, BACKGROUND_ALPHABETS);
  const evaluation = alphabets.slice(BACKGROUND_ALPHABETS);
  const splitOf = new Map<string, string>();
  for (const a of background) splitOf.set(a, "background");
  for (const a of evaluation) splitOf.set(a, "evaluation");

  glyphs.sort((a, b) =>
    `${a.alphabet}/${a.character}/${a.file}`.localeCompare(
      `${b.alphabet}/${b.character}/${b.file}`,
    ),
  );
  for (const glyph of glyphs) {
    const dir = join(outDir, splitOf.get(glyph.alphabet)!, glyph.alphabet, glyph.character);
    mkdirSync(dir, { recursive: true });
    const pgm = pngToInkPgm(glyph.data, `${glyph.alphabet}/${glyph.character}/${glyph.file}`);
    writeFileSync(join(dir, glyph.file), writePgm(pgm));
  }

  return writeManifest(outDir, {
    name: "omniglot",
    format: "pgm",
    splits: { background: ["background"], evaluation: ["evaluation"] },
    alphabets: { background, evaluation },
    counts: {
      alphabets: alphabets.length,
      background_alphabets: background.length,
      evaluation_alphabets: evaluation.length,
      images: glyphs.length,
    },
    conversion: { grayscale: GRAYSCALE, threshold: BINARIZE_THRESHOLD, ink: "white-on-black" },
  });
}
