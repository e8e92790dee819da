"""Command-line entry point.

Subcommands: detect, evaluate, pr-curve, cluster-demo, fixtures. Exit
codes: 0 ok, 1 usage error, 2 bad input data, 3 numerical failure.

For ``detect``, leaving --tms-t / --sc-c unset (or 0) disables that
stage, so the ablation grid is spanned by flags alone: no flags is the
plain mask-to-edge baseline, --bzp-p 0 drops the zero band, and the
full method is --tms-t 3 --sc-c 2 --bzp-p 5. A JSON config file can
seed the defaults (flags win); config files start from the best-known
configuration (t=3, c=2, tau=0.5, p=5).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import _kernels, imgio
from .edges import EdgeConfig, ScConfig, combine_masks, edges_from_ensembles
from .errors import DataError, NumericError, ParameterError, ScesameError
from .evaluation import GroundTruth, MetricsReport, evaluate_dataset
from .fixtures import gen_circles, gen_synthetic_scene
from .ensemble import ensembles_to_maskset
from .masks import load_mask_file, save_mask_file
from .spectral import NORMALIZED, VARIANTS, kmeans, spectral_cluster
from .affinity import knn_affinity
from .tms import TmsConfig

log = logging.getLogger("scesame")


@dataclass
class PipelineConfig:
    """Full pipeline configuration; the defaults are the best-performing
    combination (t=3, c=2, tau=0.5, p=5)."""

    tms_t: int | None = 3
    sc_c: int | None = 2
    tau: float = 0.5
    scale_neighbor: int = 7
    bzp_p: int = 5
    nms_iou: float | None = 0.7
    blur_kernel: int = 3
    laplacian_variant: str = NORMALIZED
    seed: int = 0
    tolerance_fraction: float = 0.0075
    apply_edge_nms: bool = True
    nms_low_suppress: float = 0.0

    def variant_name(self) -> str:
        parts = []
        if self.tms_t and self.sc_c:
            parts.append(f"scesame-t{self.tms_t}c{self.sc_c}")
        elif self.tms_t:
            parts.append(f"tms-t{self.tms_t}")
        elif self.sc_c:
            parts.append(f"sc-c{self.sc_c}")
        else:
            parts.append("amg")
        if self.bzp_p:
            parts.append(f"p{self.bzp_p}")
        return "".join(parts)

    def config_hash(self) -> str:
        canon = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _default_seed() -> int:
    raw = os.environ.get("SCESAME_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"SCESAME_SEED must be an integer, got {raw!r}") from None


def _config_from_args(args) -> PipelineConfig:
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
        known = {f for f in PipelineConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ParameterError(
                f"unknown config keys {sorted(unknown)}; valid keys: {sorted(known)}")
        cfg = PipelineConfig(**doc)
    else:
        cfg = PipelineConfig(tms_t=None, sc_c=None)
    if args.tms_t is not None:
        cfg.tms_t = args.tms_t or None
    if args.sc_c is not None:
        cfg.sc_c = args.sc_c or None
    if args.tau is not None:
        cfg.tau = args.tau
    if args.scale_neighbor is not None:
        cfg.scale_neighbor = args.scale_neighbor
    if args.bzp_p is not None:
        cfg.bzp_p = args.bzp_p
    if args.nms_iou is not None:
        cfg.nms_iou = args.nms_iou
    if args.no_box_nms:
        cfg.nms_iou = None
    if args.blur_kernel is not None:
        cfg.blur_kernel = args.blur_kernel
    if args.no_blur:
        cfg.blur_kernel = 1
    if args.no_nms:
        cfg.apply_edge_nms = False
    if args.nms_low_suppress is not None:
        cfg.nms_low_suppress = args.nms_low_suppress
    if args.laplacian is not None:
        cfg.laplacian_variant = args.laplacian
    if args.seed is not None:
        cfg.seed = args.seed
    elif "SCESAME_SEED" in os.environ:
        cfg.seed = _default_seed()
    return cfg


def _stage_configs(cfg: PipelineConfig):
    """Build (and thereby validate) the per-stage configurations."""
    tms = TmsConfig(cfg.tms_t) if cfg.tms_t else None
    sc = (ScConfig(c=cfg.sc_c, tau=cfg.tau, scale_neighbor=cfg.scale_neighbor,
                   variant=cfg.laplacian_variant, seed=cfg.seed)
          if cfg.sc_c else None)
    edge = EdgeConfig(blur_kernel=cfg.blur_kernel, bzp_p=cfg.bzp_p,
                      apply_nms=cfg.apply_edge_nms,
                      nms_low_suppress=cfg.nms_low_suppress)
    return tms, sc, edge


def _detect_one(mask_file: Path, cfg: PipelineConfig, out_dir: Path,
                single_out: Path | None = None,
                dump_masks_dir: Path | None = None) -> dict:
    masks = load_mask_file(mask_file)
    tms, sc, edge = _stage_configs(cfg)
    ensembles, counts = combine_masks(masks, nms_iou=cfg.nms_iou, tms=tms, sc=sc)
    edge_map = edges_from_ensembles(ensembles, edge)
    stem = Path(masks.file_name).stem or mask_file.stem
    pfm_path = single_out if single_out else out_dir / f"{stem}.pfm"
    pgm_path = pfm_path.with_suffix(".pgm")
    imgio.write_pfm(pfm_path, edge_map)
    imgio.write_pgm(pgm_path, edge_map)
    entry = {"name": stem, "masks": str(mask_file), "counts": counts,
             "pfm": str(pfm_path), "pgm": str(pgm_path)}
    if dump_masks_dir is not None:
        dump_masks_dir.mkdir(parents=True, exist_ok=True)
        merged = ensembles_to_maskset(ensembles, masks.image_height,
                                      masks.image_width, file_name=masks.file_name)
        merged_path = dump_masks_dir / f"{stem}.json"
        save_mask_file(merged, merged_path)
        entry["merged_masks"] = str(merged_path)
    return entry


def cmd_detect(args) -> int:
    cfg = _config_from_args(args)
    _stage_configs(cfg)  # reject bad flag values before touching any file
    masks_path = Path(args.masks)
    if masks_path.is_dir():
        mask_files = sorted(masks_path.glob("*.json"))
        if not mask_files:
            raise DataError(f"no *.json mask files in {masks_path}")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        single_out = None
    else:
        mask_files = [masks_path]
        single_out = Path(args.out)
        out_dir = single_out.parent
        out_dir.mkdir(parents=True, exist_ok=True)

    dump_dir = Path(args.dump_masks) if args.dump_masks else None
    entries = []
    failures = 0
    numeric_failure = False

    def record_failure(mask_file: Path, exc: ScesameError) -> None:
        nonlocal failures, numeric_failure
        failures += 1
        numeric_failure |= isinstance(exc, NumericError)
        entries.append({"masks": str(mask_file), "error": str(exc)})
        log.error("%s: %s", mask_file, exc)

    if args.jobs > 1 and len(mask_files) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_detect_one, f, cfg, out_dir, None, dump_dir)
                       for f in mask_files]
            for mask_file, fut in zip(mask_files, futures):
                try:
                    entries.append(fut.result())
                except ScesameError as exc:
                    record_failure(mask_file, exc)
    else:
        for mask_file in mask_files:
            try:
                entries.append(_detect_one(mask_file, cfg, out_dir, single_out, dump_dir))
            except ScesameError as exc:
                record_failure(mask_file, exc)

    manifest = {
        "variant": cfg.variant_name(),
        "config": asdict(cfg),
        "config_hash": cfg.config_hash(),
        "kernel_backend": _kernels.backend_name(),
        "images": entries,
    }
    if single_out:
        manifest_path = single_out.with_suffix(".manifest.json")
    else:
        manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1))
    log.info("wrote %d edge maps (%d failures), manifest %s",
             len(entries) - failures, failures, manifest_path)
    if numeric_failure:
        return 3
    return 2 if failures else 0


def _load_gt_dir(gt_dir: Path, stem: str) -> GroundTruth:
    sub = gt_dir / stem
    if not sub.is_dir():
        raise DataError(f"no ground-truth directory {sub}")
    files = sorted(p for p in sub.iterdir()
                   if p.suffix.lower() in (".pgm", ".png"))
    if not files:
        raise DataError(f"no annotation files under {sub}")
    return GroundTruth(annotations=tuple(imgio.read_annotation(p) for p in files))


def _evaluate_from_dirs(args) -> MetricsReport:
    pred_dir = Path(args.pred_dir)
    gt_dir = Path(args.gt_dir)
    pred_files = sorted(pred_dir.glob("*.pfm"))
    if not pred_files:
        raise DataError(f"no *.pfm predictions in {pred_dir}")
    preds = []
    gts = []
    names = []
    for pf in pred_files:
        preds.append(imgio.read_pfm(pf).astype(np.float64))
        gts.append(_load_gt_dir(gt_dir, pf.stem))
        names.append(pf.stem)
    return evaluate_dataset(preds, gts, tolerance_fraction=args.tolerance,
                            thin=args.thin, names=names)


def cmd_evaluate(args) -> int:
    report = _evaluate_from_dirs(args)
    Path(args.out).write_text(report.to_json())
    print(f"ODS {report.ods:.4f}  OIS {report.ois:.4f}  AP {report.ap:.4f}"
          f"  (best dataset threshold {report.ods_threshold:.2f})")
    return 0


def cmd_pr_curve(args) -> int:
    if args.report:
        doc = json.loads(Path(args.report).read_text())
        rows = [(p["threshold"], p["precision"], p["recall"], p["f1"])
                for p in doc["per_threshold"]]
    elif args.pred_dir and args.gt_dir:
        report = _evaluate_from_dirs(args)
        rows = [(p.threshold, p.precision, p.recall, p.f1)
                for p in report.per_threshold]
    else:
        raise ParameterError("pr-curve needs --report or --pred-dir/--gt-dir")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "precision", "recall", "f1"])
        writer.writerows(rows)
    log.info("wrote %s", args.out)
    return 0


def cmd_cluster_demo(args) -> int:
    from sklearn.metrics import adjusted_rand_score

    seed = args.seed if args.seed is not None else _default_seed()
    data = gen_circles(seed=seed, noise_sigma=args.noise)
    spectral = spectral_cluster(knn_affinity(data.points, 10), 3,
                                variant=NORMALIZED, seed=seed)
    plain = kmeans(data.points, 3, seed=seed)
    spectral_ari = adjusted_rand_score(data.labels, spectral.labels)
    kmeans_ari = adjusted_rand_score(data.labels, plain.labels)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "true_label", "spectral_label", "kmeans_label"])
            for p, t, s, m in zip(data.points, data.labels, spectral.labels, plain.labels):
                writer.writerow([f"{p[0]:.6f}", f"{p[1]:.6f}", int(t), int(s), int(m)])
    print(json.dumps({"spectral_ari": spectral_ari, "kmeans_ari": kmeans_ari}))
    return 0


def cmd_fixtures(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.circles:
        data = gen_circles(seed=seed, noise_sigma=args.noise)
        with open(out_dir / "circles.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "label"])
            for p, lab in zip(data.points, data.labels):
                writer.writerow([f"{p[0]:.6f}", f"{p[1]:.6f}", int(lab)])
        log.info("wrote %s", out_dir / "circles.csv")
    if args.scene:
        masks, gt = gen_synthetic_scene(seed=seed)
        name = masks.file_name
        save_mask_file(masks, out_dir / f"{name}.json")
        gt_sub = out_dir / "groundTruth" / name
        gt_sub.mkdir(parents=True, exist_ok=True)
        for i, annotation in enumerate(gt.annotations):
            imgio.write_pgm(gt_sub / f"annotator{i}.pgm",
                            annotation.astype(np.uint8) * 255)
        log.info("wrote %s and %s", out_dir / f"{name}.json", gt_sub)
    if not args.circles and not args.scene:
        raise ParameterError("fixtures needs --circles and/or --scene")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scesame",
        description="Mask-ensemble edge detection and BSDS-style evaluation",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="masks JSON -> edge map PFM/PGM")
    p.add_argument("--masks", required=True, help="mask JSON file or directory")
    p.add_argument("--out", required=True, help="output PFM file or directory")
    p.add_argument("--config", help="pipeline config JSON (flags override)")
    p.add_argument("--tms-t", type=int, default=None,
                   help="keep top 1/t largest masks (0/absent: stage off)")
    p.add_argument("--sc-c", "--clusters-c", dest="sc_c", type=int, default=None,
                   help="cluster count divisor, k=max(n//c,2) (0/absent: stage off)")
    p.add_argument("--tau", type=float, default=None, help="affinity temperature (0.5)")
    p.add_argument("--scale-neighbor", type=int, default=None,
                   help="neighbor rank for local scales (7)")
    p.add_argument("--bzp-p", type=int, default=None, help="zero-band width (5)")
    p.add_argument("--nms-iou", type=float, default=None, help="box NMS IoU (0.7)")
    p.add_argument("--no-box-nms", action="store_true",
                   help="input masks are already deduplicated")
    p.add_argument("--blur-kernel", type=int, default=None, help="Gaussian kernel (3)")
    p.add_argument("--no-blur", action="store_true")
    p.add_argument("--no-nms", action="store_true", help="skip edge thinning")
    p.add_argument("--nms-low-suppress", type=float, default=None,
                   help="multiplier for suppressed pixels (0)")
    p.add_argument("--laplacian", choices=VARIANTS, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump-masks", default=None, metavar="DIR",
                   help="also write the merged mask JSON per image")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="ODS/OIS/AP against multi-annotator GT")
    p.add_argument("--pred-dir", required=True, help="directory of *.pfm predictions")
    p.add_argument("--gt-dir", required=True,
                   help="directory with one subdirectory of annotator PGM/PNGs per image")
    p.add_argument("--tolerance", type=float, default=0.0075,
                   help="match tolerance as a fraction of the image diagonal")
    p.add_argument("--thin", action="store_true",
                   help="morphologically thin the binarized prediction first")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pr-curve", help="emit threshold/precision/recall/f1 CSV")
    p.add_argument("--report", help="report JSON from `scesame evaluate`")
    p.add_argument("--pred-dir")
    p.add_argument("--gt-dir")
    p.add_argument("--tolerance", type=float, default=0.0075)
    p.add_argument("--thin", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pr_curve)

    p = sub.add_parser("cluster-demo",
                       help="three-circles demo: spectral clustering vs plain k-means")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--out", help="optional CSV of points and labels")
    p.set_defaults(func=cmd_cluster_demo)

    p = sub.add_parser("fixtures", help="write synthetic test data")
    p.add_argument("--circles", action="store_true")
    p.add_argument("--scene", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:
            # argparse exits 2 on usage problems; our convention is 1
            code = exc.code if isinstance(exc.code, int) else 1
            return 1 if code == 2 else code
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s",
                            stream=sys.stderr)
        return args.func(args)
    except ParameterError as exc:
        log.error("%s", exc)
        return 1
    except DataError as exc:
        log.error("%s", exc)
        return 2
    except NumericError as exc:
        log.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
