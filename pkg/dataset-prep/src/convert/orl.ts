import AdmZip from "adm-zip";
import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";
import { writeManifest } from "../manifest.js";
import { parsePgm, writePgm } from "../pgm.js";

const CLASSES = 40;
const IMAGES_PER_CLASS = 10;

/**
 * Re-emit the 40x10 face PGMs under zero-padded class directories with
 * canonical P5 headers, so the output tree sorts identically everywhere
 * and converting twice is byte-identical.
 */
export function convertOrl(archiveDir: string, outDir: string): string {
  const zip = new AdmZip(join(archiveDir, "att_faces.zip"));
  const seen = new Map<number, Map<number, Buffer>>();
  for (const entry of zip.getEntries()) {
    if (entry.isDirectory) continue;
    const name = entry.entryName;
    if (name.includes("..") || name.startsWith("/")) {
      throw new Error(`att_faces.zip: refusing suspicious entry path ${name}`);
    }
    const parts = name.split("/").filter((p) => p.length > 0);
    // s<class>/<index>.pgm, possibly below one archive root directory
    const tail = parts.slice(-2);
    const m = /^s(\d+)$/.exec(tail[0] ?? "");
    const n = /^(\d+)\.pgm$/i.exec(tail[1] ?? "");
    if (!m || !n) {
      if ((tail[1] ?? "").toLowerCase().endsWith(".pgm")) {
        throw new Error(`att_faces.zip: unexpected archive entry ${name}`);
      }
      continue; // readmes and the like
    }
    const cls = parseInt(m[1], 10);
    const idx = parseInt(n[1], 10);
    if (!seen.has(cls)) seen.set(cls, new Map());
    seen.get(cls)!.set(idx, entry.getData());
  }

  const classIds = [...seen.keys()].sort((a, b) => a - b);
  if (classIds.length !== CLASSES) {
    throw new Error(`expected ${CLASSES} face classes, found ${classIds.length}`);
  }
  for (const cls of classIds) {
    const images = seen.get(cls)!;
    if (images.size !== IMAGES_PER_CLASS) {
      throw new Error(`class s${cls}: expected ${IMAGES_PER_CLASS} images, found ${images.size}`);
    }
    const dir = join(outDir, "faces", `s${String(cls).padStart(2, "0")}`);
    mkdirSync(dir, { recursive: true });
    for (const idx of [...images.keys()].sort((a, b) => a - b)) {
      const pgm = parsePgm(images.get(idx)!, `s${cls}/${idx}.pgm`);
      writeFileSync(join(dir, `img${String(idx).padStart(2, "0")}.pgm`), writePgm(pgm));
    }
  }

  return writeManifest(outDir, {
    name: "orl",
    format: "pgm",
    splits: { probe: ["faces"] },
    counts: {
      classes: CLASSES,
      images_per_class: IMAGES_PER_CLASS,
      images: CLASSES * IMAGES_PER_CLASS,
    },
    conversion: { header: "canonical-p5", maxval: 255 },
  });
}
