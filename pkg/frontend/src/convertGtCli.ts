#!/usr/bin/env node
/**
 * scesame-convert-gt: dataset ground-truth archive to per-image
 * directories of binary per-annotator PGMs (255 = edge).
 *
 *   scesame-convert-gt --archive <mat-file-or-dir> --out <dir>
 */

import { parseArgs } from "node:util";

import { convertGroundTruth } from "./convert.js";

export function main(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      archive: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.archive || !values.out) {
    console.error("scesame-convert-gt: --archive and --out are required");
    return 1;
  }
  const stats = convertGroundTruth(values.archive, values.out);
  for (const line of stats.skipped) console.error(`skipped: ${line}`);
  console.error(
    `converted ${stats.images} images, ${stats.annotations} annotations` +
      (stats.skipped.length ? `, ${stats.skipped.length} skipped` : ""),
  );
  return stats.images > 0 ? 0 : 1;
}

process.exit(main(process.argv.slice(2)));
