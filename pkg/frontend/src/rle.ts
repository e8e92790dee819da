/**
 * Column-major run-length encoding of binary masks, matching the core
 * pipeline's mask JSON: runs alternate background/foreground starting
 * with a (possibly zero-length) background run, and the run lengths
 * sum to height*width.
 */

export interface Rle {
  size: [number, number]; // [height, width]
  counts: number[];
}

/** Encode a row-major boolean mask (mask[row*width + col]). */
export function rleEncode(mask: Uint8Array, height: number, width: number): Rle {
  if (mask.length !== height * width) {
    throw new Error(`mask has ${mask.length} pixels, expected ${height * width}`);
  }
  const counts: number[] = [];
  let current = 0;
  let run = 0;
  for (let col = 0; col < width; col++) {
    for (let row = 0; row < height; row++) {
      const value = mask[row * width + col] ? 1 : 0;
      if (value === current) {
        run += 1;
      } else {
        counts.push(run);
        current = value;
        run = 1;
      }
    }
  }
  counts.push(run);
  return { size: [height, width], counts };
}

/** Decode back to a row-major Uint8Array of 0/1. */
export function rleDecode(rle: Rle): Uint8Array {
  const [height, width] = rle.size;
  const total = rle.counts.reduce((a, b) => a + b, 0);
  if (total !== height * width) {
    throw new Error(`run lengths sum to ${total}, expected ${height * width}`);
  }
  const mask = new Uint8Array(height * width);
  let pos = 0;
  let value = 0;
  for (const count of rle.counts) {
    if (count < 0) throw new Error("negative run length");
    if (value) {
      for (let i = 0; i < count; i++) {
        const flat = pos + i;
        const row = flat % height;
        const col = (flat - row) / height;
        mask[row * width + col] = 1;
      }
    }
    pos += count;
    value = 1 - value;
  }
  return mask;
}

export function rleArea(rle: Rle): number {
  let area = 0;
  for (let i = 1; i < rle.counts.length; i += 2) area += rle.counts[i];
  return area;
}
