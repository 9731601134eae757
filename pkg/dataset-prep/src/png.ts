import { PNG } from "pngjs";
import { PgmImage } from "./pgm.js";

/** Fixed grayscale constants, recorded in every manifest that uses them. */
export const GRAYSCALE = "integer-bt601";
export const BINARIZE_THRESHOLD = 128;

/**
 * PNG -> binary PGM with the ink mapped to white on black.
 *
 * Luminance is the integer BT.601 weighting, then pixels darker than
 * the fixed threshold become 255 (stroke) and the rest 0.  Everything
 * here is integer arithmetic, so the conversion is bit-reproducible.
 */
export function pngToInkPgm(data: Buffer, sourceName: string): PgmImage {
  let png: PNG;
  try {
    png = PNG.sync.read(data);
  } catch (err) {
    throw new Error(`${sourceName}: not a valid PNG (${(err as Error).message})`);
  }
  const pixels = Buffer.alloc(png.width * png.height);
  for (let i = 0; i < pixels.length; i++) {
    const r = png.data[4 * i];
    const g = png.data[4 * i + 1];
    const b = png.data[4 * i + 2];
    const lum = Math.floor((299 * r + 587 * g + 114 * b + 500) / 1000);
    pixels[i] = lum < BINARIZE_THRESHOLD ? 255 : 0;
  }
  return { width: png.width, height: png.height, pixels };
}
