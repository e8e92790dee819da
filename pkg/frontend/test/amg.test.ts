import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { boxNms, defaultAmgConfig, dumpMasks, generateMasks } from "../src/amg.js";
import { rleArea, rleDecode, rleEncode } from "../src/rle.js";
import { maskFileSchema } from "../src/schema.js";

describe("grid mask generation", () => {
  it("S1: 16x16 grid x 3 scales yields exactly 768 masks without NMS", () => {
    const masks = generateMasks(64, 48, { ...defaultAmgConfig, applyNms: false });
    expect(masks.length).toBe(16 * 16 * 3);
    const ids = new Set(masks.map((m) => m.id));
    expect(ids.size).toBe(768);
  });

  it("small grids follow the grid_side^2 * masks_per_point formula", () => {
    const masks = generateMasks(40, 30, {
      ...defaultAmgConfig, gridSide: 1, masksPerPoint: 3, applyNms: false,
    });
    expect(masks.length).toBe(3);
  });

  it("NMS reduces the mask count and keeps the best-scoring duplicates", () => {
    const full = generateMasks(64, 48, { ...defaultAmgConfig, applyNms: false });
    const kept = boxNms(full, 0.7);
    expect(kept.length).toBeGreaterThan(0);
    expect(kept.length).toBeLessThan(full.length);
    const keptIds = new Set(kept.map((m) => m.id));
    for (const m of kept) expect(keptIds.has(m.id)).toBe(true);
  });

  it("masks carry consistent geometry", () => {
    for (const m of generateMasks(32, 24, { ...defaultAmgConfig, gridSide: 4, applyNms: false })) {
      expect(rleArea(m.rle)).toBe(m.area);
      const [x, y, w, h] = m.bbox;
      expect(x).toBeGreaterThanOrEqual(0);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(x + w).toBeLessThanOrEqual(32);
      expect(y + h).toBeLessThanOrEqual(24);
      expect(m.area).toBeGreaterThan(0);
      expect(m.area).toBeLessThanOrEqual(w * h);
    }
  });
});

describe("mask dump", () => {
  it("S1: dump validates against the schema and round-trips through the RLE codec", () => {
    const dir = mkdtempSync(join(tmpdir(), "dump-"));
    const out = join(dir, "img.json");
    const result = dumpMasks("img.pgm", 64, 48, { ...defaultAmgConfig, applyNms: false }, out);
    expect(result.maskCount).toBe(768);

    const doc = maskFileSchema.parse(JSON.parse(readFileSync(out, "utf8")));
    expect(doc.masks.length).toBe(768);
    expect(doc.image.height).toBe(48);
    expect(doc.image.width).toBe(64);
    for (const entry of doc.masks.slice(0, 50)) {
      const decoded = rleDecode({ size: entry.rle.size, counts: entry.rle.counts });
      const reencoded = rleEncode(decoded, entry.rle.size[0], entry.rle.size[1]);
      expect(reencoded.counts).toEqual(entry.rle.counts);
    }
  });

  it("writes logit sidecars of exactly height*width little-endian floats", () => {
    const dir = mkdtempSync(join(tmpdir(), "dump-logits-"));
    const out = join(dir, "img.json");
    dumpMasks("img.pgm", 20, 16, {
      ...defaultAmgConfig, gridSide: 2, applyNms: false, dumpLogits: true,
    }, out);
    const doc = maskFileSchema.parse(JSON.parse(readFileSync(out, "utf8")));
    for (const entry of doc.masks) {
      expect(entry.logits_file).not.toBeNull();
      const raw = readFileSync(join(dir, entry.logits_file as string));
      expect(raw.length).toBe(4 * 20 * 16);
      // sigmoid(logit) crosses 0.5 exactly on the mask support
      const decoded = rleDecode({ size: entry.rle.size, counts: entry.rle.counts });
      for (let i = 0; i < decoded.length; i += 37) {
        const logit = raw.readFloatLE(4 * i);
        if (decoded[i]) expect(logit).toBeGreaterThanOrEqual(0);
      }
    }
  });

  it("is deterministic", () => {
    const dir = mkdtempSync(join(tmpdir(), "dump-det-"));
    const a = join(dir, "a.json");
    const b = join(dir, "b.json");
    dumpMasks("x", 48, 32, defaultAmgConfig, a);
    dumpMasks("x", 48, 32, defaultAmgConfig, b);
    expect(readFileSync(a, "utf8")).toBe(readFileSync(b, "utf8"));
  });
});
