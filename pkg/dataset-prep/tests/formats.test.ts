import { expect, test } from "vitest";
import { sha256 } from "../src/hash.js";
import { IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, inspectIdx } from "../src/idx.js";
import { parsePgm, writePgm } from "../src/pgm.js";
import { idxImages, idxLabels } from "./fixtures.js";

// ------------------------------------------------------------------ pgm --

test("pgm roundtrip is canonical", () => {
  const img = { width: 3, height: 2, pixels: Buffer.from([0, 50, 100, 150, 200, 255]) };
  const blob = writePgm(img);
  expect(blob.subarray(0, 11).toString("latin1")).toBe("P5\n3 2\n255\n");
  const back = parsePgm(blob, "roundtrip");
  expect(back.width).toBe(3);
  expect(back.height).toBe(2);
  expect(Buffer.compare(back.pixels, img.pixels)).toBe(0);
  // writing what we parsed reproduces the bytes exactly
  expect(Buffer.compare(writePgm(back), blob)).toBe(0);
});

test("pgm header tolerates comments and spread-out whitespace", () => {
  const pixels = Buffer.from([1, 2, 3, 4, 5, 6]);
  const blob = Buffer.concat([
    Buffer.from("P5\n# a comment\n 3\t2 # trailing\n255\n", "latin1"),
    pixels,
  ]);
  const img = parsePgm(blob, "commented");
  expect([img.width, img.height]).toEqual([3, 2]);
  expect(Buffer.compare(img.pixels, pixels)).toBe(0);
});

test("pgm maxval below 255 rescales to full range", () => {
  const blob = Buffer.concat([Buffer.from("P5\n2 1\n15\n", "latin1"), Buffer.from([0, 15])]);
  const img = parsePgm(blob, "lowmax");
  expect([...img.pixels]).toEqual([0, 255]);
});

test("pgm rejects wrong magic and truncation", () => {
  expect(() => parsePgm(Buffer.from("P2\n1 1\n255\n9", "latin1"), "ascii")).toThrow(/not a binary PGM/);
  expect(() => parsePgm(Buffer.from("P5\n4 4\n255\n", "latin1"), "short")).toThrow(/truncated/);
  const missing = Buffer.concat([Buffer.from("P5\n3 3\n255\n", "latin1"), Buffer.alloc(4)]);
  expect(() => parsePgm(missing, "cut")).toThrow(/pixel data truncated/);
});

// ------------------------------------------------------------------ idx --

test("idx inspect reads image and label headers", () => {
  const images = inspectIdx(idxImages(5, 4, 3), "img");
  expect(images).toEqual({ magic: IDX_IMAGES_MAGIC, count: 5, rows: 4, cols: 3 });
  const labels = inspectIdx(idxLabels(7), "lab");
  expect(labels).toEqual({ magic: IDX_LABELS_MAGIC, count: 7, rows: 0, cols: 0 });
});

test("idx rejects bad magic and payload size lies", () => {
  const bad = idxImages(2, 2, 2);
  bad.writeUInt32BE(0x00000900, 0);
  expect(() => inspectIdx(bad, "magic")).toThrow(/unknown IDX magic 0x00000900/);
  const short = idxLabels(10).subarray(0, 12);
  expect(() => inspectIdx(Buffer.from(short), "short")).toThrow(/header says 10/);
  expect(() => inspectIdx(Buffer.from([0, 8]), "tiny")).toThrow(/truncated IDX header/);
});

// ----------------------------------------------------------------- hash --

test("sha256 matches the well-known empty-input digest", () => {
  expect(sha256(Buffer.alloc(0))).toBe(
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
  );
});
