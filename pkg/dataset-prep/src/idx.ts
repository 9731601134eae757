/** IDX file inspection (the big-endian tensor container MNIST ships in). */

export const IDX_IMAGES_MAGIC = 0x00000803;
export const IDX_LABELS_MAGIC = 0x00000801;

export interface IdxInfo {
  magic: number;
  count: number;
  rows: number; // 0 for label files
  cols: number;
}

export function inspectIdx(data: Buffer, sourceName: string): IdxInfo {
  if (data.length < 8) throw new Error(`${sourceName}: truncated IDX header`);
  const magic = data.readUInt32BE(0);
  const count = data.readUInt32BE(4);
  if (magic === IDX_LABELS_MAGIC) {
    if (data.length !== 8 + count) {
      throw new Error(`${sourceName}: label payload is ${data.length - 8} bytes, header says ${count}`);
    }
    return { magic, count, rows: 0, cols: 0 };
  }
  if (magic === IDX_IMAGES_MAGIC) {
    if (data.length < 16) throw new Error(`${sourceName}: truncated IDX image header`);
    const rows = data.readUInt32BE(8);
    const cols = data.readUInt32BE(12);
    if (data.length !== 16 + count * rows * cols) {
      throw new Error(
        `${sourceName}: image payload is ${data.length - 16} bytes, header says ${count * rows * cols}`,
      );
    }
    return { magic, count, rows, cols };
  }
  throw new Error(
    `${sourceName}: unknown IDX magic 0x${magic.toString(16).padStart(8, "0")}`,
  );
}
