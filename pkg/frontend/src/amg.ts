/**
 * Automatic mask generation over a regular prompt grid.
 *
 * A mask source receives one prompt point and returns masks at
 * masksPerPoint scales (finest to coarsest). The real segmentation
 * model plugs in behind this interface; the synthetic source below is
 * the deterministic stand-in used for tests and dry runs. Either way
 * the adapter owns the AMG bookkeeping: grid_side^2 * masks_per_point
 * masks before NMS, optional box NMS, RLE dump with logit sidecars.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { basename, dirname, join } from "node:path";

import { rleEncode, type Rle } from "./rle.js";
import type { MaskFile } from "./schema.js";

export interface AmgConfig {
  gridSide: number;
  masksPerPoint: number;
  applyNms: boolean;
  nmsIou: number;
  dumpLogits: boolean;
}

export const defaultAmgConfig: AmgConfig = {
  gridSide: 16,
  masksPerPoint: 3,
  applyNms: true,
  nmsIou: 0.7,
  dumpLogits: false,
};

export interface GeneratedMask {
  /** row-major 0/1 mask */
  mask: Uint8Array;
  /** row-major logit map, same grid as the image */
  logits: Float32Array | null;
  score: number;
}

export type MaskSource = (
  cx: number,
  cy: number,
  scaleIndex: number,
  width: number,
  height: number,
) => GeneratedMask;

/** Relative radii of the three mask scales (subpart, part, whole-ish). */
const SCALE_FRACTIONS = [0.05, 0.12, 0.26];

/**
 * Deterministic synthetic source: an ellipse around the prompt point
 * whose radius grows with the scale index, clipped by the image
 * border (clipped masks are what the boundary zero padding stage in
 * the core pipeline exists to clean up). Logits ramp from +6 at the
 * center to -6 outside, so sigmoid crosses 0.5 at the mask contour.
 */
export const syntheticSource: MaskSource = (cx, cy, scaleIndex, width, height) => {
  const base = Math.min(width, height);
  const fraction = SCALE_FRACTIONS[Math.min(scaleIndex, SCALE_FRACTIONS.length - 1)];
  const rx = Math.max(1.5, base * fraction * (1 + 0.35 * (cx / width - 0.5)));
  const ry = Math.max(1.5, base * fraction * (1 - 0.35 * (cy / height - 0.5)));
  const mask = new Uint8Array(width * height);
  const logits = new Float32Array(width * height);
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      const d = Math.sqrt(((c - cx) / rx) ** 2 + ((r - cy) / ry) ** 2);
      mask[r * width + c] = d <= 1.0 ? 1 : 0;
      logits[r * width + c] = Math.max(-6, Math.min(6, 6 * (1 - d)));
    }
  }
  const score = 0.9 - 0.18 * scaleIndex + 0.05 * Math.sin(11.17 * cx + 7.31 * cy);
  return { mask, logits, score };
};

export interface AmgMask {
  id: number;
  rle: Rle;
  area: number;
  bbox: [number, number, number, number]; // x, y, w, h
  score: number;
  logits: Float32Array | null;
}

function tightBbox(mask: Uint8Array, width: number, height: number):
    [number, number, number, number] | null {
  let xMin = width, xMax = -1, yMin = height, yMax = -1;
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      if (mask[r * width + c]) {
        if (c < xMin) xMin = c;
        if (c > xMax) xMax = c;
        if (r < yMin) yMin = r;
        if (r > yMax) yMax = r;
      }
    }
  }
  if (xMax < 0) return null;
  return [xMin, yMin, xMax - xMin + 1, yMax - yMin + 1];
}

function boxIou(a: [number, number, number, number], b: [number, number, number, number]): number {
  const ix = Math.max(0, Math.min(a[0] + a[2], b[0] + b[2]) - Math.max(a[0], b[0]));
  const iy = Math.max(0, Math.min(a[1] + a[3], b[1] + b[3]) - Math.max(a[1], b[1]));
  const inter = ix * iy;
  return inter / (a[2] * a[3] + b[2] * b[3] - inter);
}

/** Greedy box NMS: score desc, ties larger area then lower id first. */
export function boxNms(masks: AmgMask[], iouThreshold: number): AmgMask[] {
  const order = [...masks].sort(
    (a, b) => b.score - a.score || b.area - a.area || a.id - b.id,
  );
  const kept: AmgMask[] = [];
  for (const candidate of order) {
    if (kept.every((k) => boxIou(candidate.bbox, k.bbox) < iouThreshold)) {
      kept.push(candidate);
    }
  }
  return kept;
}

/** Run the grid of prompts through a mask source. */
export function generateMasks(
  width: number,
  height: number,
  cfg: AmgConfig,
  source: MaskSource = syntheticSource,
): AmgMask[] {
  const out: AmgMask[] = [];
  let id = 0;
  for (let j = 0; j < cfg.gridSide; j++) {
    for (let i = 0; i < cfg.gridSide; i++) {
      const cx = ((i + 0.5) * width) / cfg.gridSide;
      const cy = ((j + 0.5) * height) / cfg.gridSide;
      for (let s = 0; s < cfg.masksPerPoint; s++) {
        const generated = source(cx, cy, s, width, height);
        const bbox = tightBbox(generated.mask, width, height);
        if (bbox === null) continue; // fully clipped, nothing to dump
        let area = 0;
        for (const v of generated.mask) area += v;
        out.push({
          id: id++,
          rle: rleEncode(generated.mask, height, width),
          area,
          bbox,
          score: generated.score,
          logits: cfg.dumpLogits ? generated.logits : null,
        });
      }
    }
  }
  return cfg.applyNms ? boxNms(out, cfg.nmsIou) : out;
}

export interface DumpResult {
  jsonPath: string;
  maskCount: number;
}

/** Dump one image's masks as core-pipeline mask JSON (+ logit sidecars). */
export function dumpMasks(
  imageName: string,
  width: number,
  height: number,
  cfg: AmgConfig,
  outPath: string,
  source: MaskSource = syntheticSource,
  weights: string | null = null,
): DumpResult {
  const masks = generateMasks(width, height, cfg, source);
  const stem = basename(outPath).replace(/\.json$/, "");
  const outDir = dirname(outPath);
  mkdirSync(outDir, { recursive: true });
  const doc: MaskFile = {
    image: { height, width, file_name: imageName },
    masks: masks.map((m) => {
      let logitsFile: string | null = null;
      if (m.logits) {
        logitsFile = `${stem}_mask${m.id}.f32`;
        const buf = Buffer.alloc(4 * m.logits.length);
        for (let i = 0; i < m.logits.length; i++) buf.writeFloatLE(m.logits[i], 4 * i);
        writeFileSync(join(outDir, logitsFile), buf);
      }
      return { id: m.id, rle: m.rle, score: m.score, logits_file: logitsFile };
    }),
    generator: {
      backend: weights === null ? "synthetic" : "model",
      weights,
      grid_side: cfg.gridSide,
      masks_per_point: cfg.masksPerPoint,
      nms_iou: cfg.applyNms ? cfg.nmsIou : null,
    },
  };
  writeFileSync(outPath, JSON.stringify(doc));
  return { jsonPath: outPath, maskCount: masks.length };
}
