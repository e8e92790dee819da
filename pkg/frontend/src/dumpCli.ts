#!/usr/bin/env node
/**
 * scesame-dump: run automatic mask generation over a directory of
 * images and write one mask JSON per image (plus logit sidecars).
 *
 *   scesame-dump --images <dir> --out <dir> [--weights <path>]
 *                [--synthetic] [--no-nms] [--logits]
 *                [--grid-side 16] [--masks-per-point 3] [--nms-iou 0.7]
 *
 * A real segmentation model plugs in via --weights; without weights,
 * --synthetic selects the deterministic stand-in generator (masks are
 * geometric, but the dump exercises the full AMG bookkeeping and file
 * format). Missing weights without --synthetic is a configuration
 * error.
 */

import { existsSync, readdirSync, statSync } from "node:fs";
import { basename, extname, join } from "node:path";
import { parseArgs } from "node:util";

import { defaultAmgConfig, dumpMasks, syntheticSource, type AmgConfig } from "./amg.js";
import { imageSize } from "./images.js";

const IMAGE_EXTENSIONS = new Set([".pgm", ".ppm", ".png", ".jpg", ".jpeg"]);

function fail(message: string): never {
  console.error(`scesame-dump: ${message}`);
  process.exit(1);
}

export function main(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: "string" },
      out: { type: "string" },
      weights: { type: "string" },
      synthetic: { type: "boolean", default: false },
      "no-nms": { type: "boolean", default: false },
      logits: { type: "boolean", default: false },
      "grid-side": { type: "string", default: String(defaultAmgConfig.gridSide) },
      "masks-per-point": { type: "string", default: String(defaultAmgConfig.masksPerPoint) },
      "nms-iou": { type: "string", default: String(defaultAmgConfig.nmsIou) },
    },
  });
  if (!values.images || !values.out) fail("--images and --out are required");

  let weights: string | null = null;
  if (values.weights) {
    if (!existsSync(values.weights)) {
      fail(`model weights not found at ${values.weights}; pass --synthetic to use the stand-in generator`);
    }
    // No in-process model runtime is wired up here; the synthetic source
    // keeps the dump format exercised until one is.
    fail("no model runtime is bundled; run with --synthetic and feed real dumps separately");
  } else if (!values.synthetic) {
    fail("no --weights given; pass --synthetic to use the deterministic stand-in generator");
  }

  const cfg: AmgConfig = {
    gridSide: parseInt(values["grid-side"] as string, 10),
    masksPerPoint: parseInt(values["masks-per-point"] as string, 10),
    applyNms: !values["no-nms"],
    nmsIou: parseFloat(values["nms-iou"] as string),
    dumpLogits: Boolean(values.logits),
  };
  if (!(cfg.gridSide >= 1) || !(cfg.masksPerPoint >= 1)) fail("grid parameters must be >= 1");

  const imagesDir = values.images as string;
  const files = statSync(imagesDir).isDirectory()
    ? readdirSync(imagesDir)
        .filter((f) => IMAGE_EXTENSIONS.has(extname(f).toLowerCase()))
        .sort()
        .map((f) => join(imagesDir, f))
    : [imagesDir];
  if (files.length === 0) fail(`no images under ${imagesDir}`);

  let total = 0;
  for (const file of files) {
    const { width, height } = imageSize(file);
    const stem = basename(file, extname(file));
    const result = dumpMasks(
      basename(file), width, height, cfg,
      join(values.out as string, `${stem}.json`), syntheticSource, weights,
    );
    total += result.maskCount;
    console.error(`${stem}: ${result.maskCount} masks (${width}x${height})`);
  }
  console.error(`wrote ${files.length} dumps, ${total} masks total`);
  return 0;
}

process.exit(main(process.argv.slice(2)));
