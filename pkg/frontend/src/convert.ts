/**
 * Ground-truth conversion: dataset annotation archives to the per-image
 * directories of binary per-annotator PGMs (255 = edge) the evaluator
 * consumes.
 *
 * Supported inputs: a .mat file (cell array of structs with a
 * "Boundaries" logical matrix per annotator, the usual boundary-dataset
 * layout), a directory tree of such files, or a directory tree of
 * per-image subdirectories already holding one PGM per annotator
 * (normalized losslessly).
 */

import { mkdirSync, readdirSync, readFileSync, statSync } from "node:fs";
import { basename, extname, join } from "node:path";

import { readPgm, writePgm } from "./images.js";
import { parseMat, toRowMajorBinary, type MatNumeric, type MatValue } from "./mat.js";

export interface ConvertStats {
  images: number;
  annotations: number;
  skipped: string[];
}

function boundaryMatrices(values: MatValue[]): MatNumeric[] {
  const out: MatNumeric[] = [];
  for (const value of values) {
    if (value.kind !== "cell") continue;
    for (const cell of value.cells) {
      if (cell.kind !== "struct") continue;
      const field = Object.keys(cell.fields).find((f) => f.toLowerCase() === "boundaries");
      if (!field) continue;
      for (const entry of cell.fields[field]) {
        if (entry.kind === "numeric") out.push(entry);
      }
    }
  }
  return out;
}

export function convertMatFile(matPath: string, outDir: string, stats: ConvertStats): void {
  let matrices: MatNumeric[];
  try {
    matrices = boundaryMatrices(parseMat(readFileSync(matPath)));
  } catch (err) {
    stats.skipped.push(`${matPath}: ${(err as Error).message}`);
    return;
  }
  if (matrices.length === 0) {
    stats.skipped.push(`${matPath}: no boundary annotations found`);
    return;
  }
  const stem = basename(matPath, extname(matPath));
  const imageDir = join(outDir, stem);
  mkdirSync(imageDir, { recursive: true });
  matrices.forEach((matrix, index) => {
    const { height, width, pixels } = toRowMajorBinary(matrix);
    const bytes = new Uint8Array(pixels.length);
    for (let i = 0; i < pixels.length; i++) bytes[i] = pixels[i] ? 255 : 0;
    writePgm(join(imageDir, `annotator${index}.pgm`), { width, height, pixels: bytes });
    stats.annotations += 1;
  });
  stats.images += 1;
}

function convertPgmDir(imageDir: string, outDir: string, stats: ConvertStats): void {
  const files = readdirSync(imageDir)
    .filter((f) => f.toLowerCase().endsWith(".pgm"))
    .sort();
  if (files.length === 0) {
    stats.skipped.push(`${imageDir}: no PGM annotations`);
    return;
  }
  const targetDir = join(outDir, basename(imageDir));
  mkdirSync(targetDir, { recursive: true });
  files.forEach((file, index) => {
    try {
      const img = readPgm(join(imageDir, file));
      const bytes = new Uint8Array(img.pixels.length);
      for (let i = 0; i < bytes.length; i++) bytes[i] = img.pixels[i] >= 128 ? 255 : 0;
      writePgm(join(targetDir, `annotator${index}.pgm`), { ...img, pixels: bytes });
      stats.annotations += 1;
    } catch (err) {
      stats.skipped.push(`${join(imageDir, file)}: ${(err as Error).message}`);
    }
  });
  stats.images += 1;
}

/** Convert an archive path (file or tree); returns conversion counts. */
export function convertGroundTruth(archive: string, outDir: string): ConvertStats {
  const stats: ConvertStats = { images: 0, annotations: 0, skipped: [] };
  const info = statSync(archive);
  if (info.isFile()) {
    if (extname(archive).toLowerCase() !== ".mat") {
      throw new Error(`expected a .mat file or a directory, got ${archive}`);
    }
    convertMatFile(archive, outDir, stats);
    return stats;
  }
  const walk = (dir: string): void => {
    const entries = readdirSync(dir).sort();
    const mats = entries.filter((e) => e.toLowerCase().endsWith(".mat"));
    for (const mat of mats) convertMatFile(join(dir, mat), outDir, stats);
    const hasPgms = entries.some((e) => e.toLowerCase().endsWith(".pgm"));
    if (hasPgms && dir !== archive) {
      convertPgmDir(dir, outDir, stats);
      return;
    }
    for (const entry of entries) {
      const child = join(dir, entry);
      if (statSync(child).isDirectory()) walk(child);
    }
  };
  walk(archive);
  return stats;
}
