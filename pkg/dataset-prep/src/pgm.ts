/** Binary PGM (P5) reading and canonical writing.
 *
 * Output is always the same byte layout -- `P5\n<w> <h>\n255\n` followed
 * by one byte per pixel -- so converting twice produces identical files
 * regardless of how the source file formatted its header.
 */

export interface PgmImage {
  width: number;
  height: number;
  pixels: Buffer; // row-major, one byte per pixel, maxval 255
}

export function parsePgm(data: Buffer, sourceName: string): PgmImage {
  if (data.length < 2 || data.toString("latin1", 0, 2) !== "P5") {
    throw new Error(`${sourceName}: not a binary PGM (P5) file`);
  }
  // header: three whitespace-separated fields, # comments to end of line
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    if (pos >= data.length) throw new Error(`${sourceName}: truncated PGM header`);
    const ch = data[pos];
    if (ch === 0x23) {
      // comment
      while (pos < data.length && data[pos] !== 0x0a) pos++;
    } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
      pos++;
    } else {
      let end = pos;
      while (end < data.length && data[end] >= 0x30 && data[end] <= 0x39) end++;
      if (end === pos) throw new Error(`${sourceName}: malformed PGM header`);
      fields.push(parseInt(data.toString("latin1", pos, end), 10));
      pos = end;
    }
  }
  pos++; // single whitespace byte after maxval
  const [width, height, maxval] = fields;
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw new Error(`${sourceName}: unsupported PGM geometry ${width}x${height} maxval ${maxval}`);
  }
  if (data.length - pos < width * height) {
    throw new Error(`${sourceName}: PGM pixel data truncated`);
  }
  let pixels = data.subarray(pos, pos + width * height);
  if (maxval !== 255) {
    const scaled = Buffer.alloc(pixels.length);
    for (let i = 0; i < pixels.length; i++) {
      scaled[i] = Math.round((pixels[i] * 255) / maxval);
    }
    pixels = scaled;
  }
  return { width, height, pixels: Buffer.from(pixels) };
}

export function writePgm(image: PgmImage): Buffer {
  const header = Buffer.from(`P5\n${image.width} ${image.height}\n255\n`, "latin1");
  return Buffer.concat([header, image.pixels]);
}
