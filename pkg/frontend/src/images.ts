/**
 * Minimal image I/O: binary PGM read/write, grayscale PFM write, and
 * dimension sniffing for PGM/PPM/PNG/JPEG (the dump tool only needs an
 * image's size to lay out its prompt grid).
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface Gray {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major
}

export function writePgm(path: string, img: Gray): void {
  const header = Buffer.from(`P5\n${img.width} ${img.height}\n255\n`, "ascii");
  writeFileSync(path, Buffer.concat([header, Buffer.from(img.pixels)]));
}

export function readPgm(path: string): Gray {
  const data = readFileSync(path);
  let pos = 0;
  const token = (): string => {
    while (pos < data.length) {
      const ch = data[pos];
      if (ch === 0x23) {
        // comment
        while (pos < data.length && data[pos] !== 0x0a) pos++;
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < data.length && !/\s/.test(String.fromCharCode(data[pos]))) pos++;
    return data.subarray(start, pos).toString("ascii");
  };
  if (token() !== "P5") throw new Error(`${path}: not a binary PGM`);
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(maxval > 0 && maxval < 256)) throw new Error(`${path}: unsupported maxval`);
  pos += 1; // single whitespace after maxval
  const pixels = new Uint8Array(data.subarray(pos, pos + width * height));
  if (pixels.length !== width * height) throw new Error(`${path}: truncated PGM`);
  return { width, height, pixels };
}

/** Grayscale PFM, little-endian, bottom-to-top rows (scale -1). */
export function writePfm(path: string, values: Float32Array, height: number, width: number): void {
  const header = Buffer.from(`Pf\n${width} ${height}\n-1.0\n`, "ascii");
  const payload = Buffer.alloc(4 * height * width);
  for (let r = 0; r < height; r++) {
    const srcRow = height - 1 - r; // bottom-up
    for (let c = 0; c < width; c++) {
      payload.writeFloatLE(values[srcRow * width + c], 4 * (r * width + c));
    }
  }
  writeFileSync(path, Buffer.concat([header, payload]));
}

export interface ImageSize {
  width: number;
  height: number;
}

/** Image dimensions from the file header (PGM/PPM/PNG/JPEG). */
export function imageSize(path: string): ImageSize {
  const data = readFileSync(path);
  if (data.length >= 2 && data[0] === 0x50 && data[1] >= 0x31 && data[1] <= 0x36) {
    // PNM family: P1..P6
    const text = data.subarray(0, 512).toString("latin1").replace(/#[^\n]*/g, " ");
    const fields = text.split(/\s+/).filter(Boolean);
    return { width: parseInt(fields[1], 10), height: parseInt(fields[2], 10) };
  }
  if (data.length >= 24 && data.readUInt32BE(0) === 0x89504e47) {
    // PNG: IHDR starts at byte 16
    return { width: data.readUInt32BE(16), height: data.readUInt32BE(20) };
  }
  if (data.length >= 4 && data[0] === 0xff && data[1] === 0xd8) {
    // JPEG: scan segments for a start-of-frame marker
    let pos = 2;
    while (pos + 9 < data.length) {
      if (data[pos] !== 0xff) {
        pos++;
        continue;
      }
      const marker = data[pos + 1];
      if (marker >= 0xc0 && marker <= 0xcf && marker !== 0xc4 && marker !== 0xc8 && marker !== 0xcc) {
        return { height: data.readUInt16BE(pos + 5), width: data.readUInt16BE(pos + 7) };
      }
      const length = data.readUInt16BE(pos + 2);
      pos += 2 + length;
    }
    throw new Error(`${path}: no JPEG frame header found`);
  }
  throw new Error(`${path}: unsupported image format (need PGM/PPM/PNG/JPEG)`);
}
