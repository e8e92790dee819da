/** Zod schema of the mask JSON consumed by the core pipeline. */

import { z } from "zod";

export const rleSchema = z
  .object({
    size: z.tuple([z.number().int().positive(), z.number().int().positive()]),
    counts: z.array(z.number().int().nonnegative()),
  })
  .refine(
    (rle) => rle.counts.reduce((a, b) => a + b, 0) === rle.size[0] * rle.size[1],
    { message: "run lengths must sum to height*width" },
  );

export const maskEntrySchema = z.object({
  id: z.number().int(),
  rle: rleSchema,
  score: z.number().nullable(),
  logits_file: z.string().nullable(),
});

export const maskFileSchema = z.object({
  image: z.object({
    height: z.number().int().positive(),
    width: z.number().int().positive(),
    file_name: z.string(),
  }),
  masks: z.array(maskEntrySchema),
  generator: z
    .object({
      backend: z.string(),
      weights: z.string().nullable(),
      grid_side: z.number().int(),
      masks_per_point: z.number().int(),
      nms_iou: z.number().nullable(),
    })
    .optional(),
});

export type MaskFile = z.infer<typeof maskFileSchema>;
export type MaskEntry = z.infer<typeof maskEntrySchema>;
