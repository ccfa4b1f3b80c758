"""Batch command-line front end for the toolkit.

Subcommands: enhance, stats, split, match, nms, eval. All configuration is
explicit (no environment variables), diagnostics go to stderr, and reruns on
identical inputs produce byte-identical outputs. PNG and JPEG inputs are
decoded here; enhanced output is always PNG.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import __version__
from .annotations import (
    DatasetLoadError,
    LabelFormatError,
    list_image_ids,
    load_dataset,
    read_label_file,
    serialize_detection,
)
from .assignment import CandidatePrediction, hungarian, match_cost_matrix
from .datasetops import class_distribution, scene_group_key, split_ids, SplitConfig
from .evaluation import (
    DEFAULT_IOU_THRESHOLDS,
    EvalReport,
    EvaluationError,
    evaluate,
    load_predictions,
    nms as nms_filter,
    read_prediction_file,
)
from .imageops import ClaheParams, GammaValue, Raster, apply_on_luma, clahe, equalize_hist, gamma_correct

VERSION_LINE = f"# detkit {__version__}"

_GRAYSCALE_MODES = ("1", "I", "I;16", "LA")


class CliUsageError(Exception):
    """Bad invocation detected after argument parsing (missing paths etc.)."""


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1]: {text}")
    return value


def _tiles(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected COLSxROWS, e.g. 8x8: {text}")
    try:
        tx, ty = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected COLSxROWS, e.g. 8x8: {text}") from None
    if tx < 1 or ty < 1:
        raise argparse.ArgumentTypeError(f"tile counts must be >= 1: {text}")
    return tx, ty


def decode_raster(path: Path) -> Raster:
    """Decode a PNG/JPEG file to a 1- or 3-channel raster."""
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                converted = img
            elif img.mode in _GRAYSCALE_MODES:
                converted = img.convert("L")
            else:
                converted = img.convert("RGB")
            arr = np.asarray(converted, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise CliUsageError(f"cannot decode image {path}: {exc}") from exc
    return Raster.from_array(arr)


def encode_png(raster: Raster, path: Path) -> None:
    Image.fromarray(raster.samples).save(path, format="PNG")


def _require_dir(path: Path, what: str) -> Path:
    if not path.is_dir():
        raise CliUsageError(f"{what} is not a directory: {path}")
    return path


def _enhance_op(args):
    if args.technique == "he":
        return equalize_hist, "technique=he"
    if args.technique == "gamma":
        g = GammaValue(args.gamma)
        return (lambda r: gamma_correct(r, g)), f"technique=gamma gamma={args.gamma:.6f}"
    tx, ty = args.tiles
    clip = None if args.clip is not None and args.clip <= 0 else args.clip
    params = ClaheParams(tiles_x=tx, tiles_y=ty, clip_limit=clip)
    clip_desc = "disabled" if clip is None else f"{clip:.6f}"
    return (
        lambda r: clahe(r, params),
        f"technique=clahe tiles={tx}x{ty} clip={clip_desc}",
    )


def cmd_enhance(args) -> int:
    in_dir = _require_dir(Path(args.input), "input")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    op, params_desc = _enhance_op(args)

    def process(item):
        image_id, path = item
        raster = decode_raster(path)
        if raster.channels == 1:
            result = op(raster)
        else:
            result = apply_on_luma(raster, op)
        out_name = f"{image_id}.png"
        encode_png(result, out_dir / out_name)
        return f"{path.name}\t{out_name}\t{params_desc}"

    images = list_image_ids(in_dir)
    with ThreadPoolExecutor(max_workers=8) as pool:
        lines = list(pool.map(process, images))
    manifest = out_dir / "manifest.txt"
    manifest.write_text("\n".join([VERSION_LINE, *lines]) + "\n", encoding="utf-8")
    return 0


def _format_stats(dataset) -> str:
    report = class_distribution(dataset)
    lines = [VERSION_LINE, "class_id,class_name,count"]
    for class_id, name in enumerate(dataset.taxonomy.names):
        lines.append(f"{class_id},{name},{report.class_counts[class_id]}")
    lines.append(
        f"# totals images={report.total_images} objects={report.total_objects} "
        f"classes={len(dataset.taxonomy)} groups={len(report.group_image_counts)}"
    )
    return "\n".join(lines) + "\n"


def cmd_stats(args) -> int:
    root = _require_dir(Path(args.dataset), "dataset")
    dataset = load_dataset(root / "images", root / "labels", args.classes)
    text = _format_stats(dataset)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_split(args) -> int:
    root = _require_dir(Path(args.dataset), "dataset")
    ids = [image_id for image_id, _ in list_image_ids(root / "images")]
    cfg = SplitConfig(val_fraction=args.val_fraction, seed=args.seed)
    result = split_ids(((i, scene_group_key(i)) for i in ids), cfg)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, id_set in (("train.txt", result.train_ids), ("val.txt", result.val_ids)):
        (out_dir / name).write_text(
            "\n".join(sorted(id_set)) + "\n", encoding="utf-8"
        )
    return 0


def _infer_class_count(paths: list[Path]) -> int:
    highest = 0
    for path in paths:
        if not path.exists():
            continue
        for line in path.read_text(encoding="utf-8").splitlines():
            tokens = line.split()
            if tokens:
                try:
                    highest = max(highest, int(tokens[0]))
                except ValueError:
                    continue
    return highest + 1


def cmd_match(args) -> int:
    labels_path = Path(args.labels)
    preds_path = Path(args.predictions)
    for path in (labels_path, preds_path):
        if not path.is_file():
            raise CliUsageError(f"not a file: {path}")
    if args.classes:
        from .annotations import ClassTaxonomy

        class_count = len(ClassTaxonomy.from_file(args.classes))
    elif args.num_classes:
        class_count = args.num_classes
    else:
        class_count = _infer_class_count([labels_path, preds_path])
    targets = list(read_label_file(labels_path, class_count))
    detections = read_prediction_file(preds_path, class_count)
    # spread the residual probability mass uniformly over the other classes
    preds = []
    for det in detections:
        probs = [0.0] * class_count
        if class_count > 1:
            rest = (1.0 - det.confidence) / (class_count - 1)
            probs = [rest] * class_count
        probs[det.class_id] = det.confidence if class_count > 1 else 1.0
        preds.append(CandidatePrediction(tuple(probs), det.box))
    cost = match_cost_matrix(preds, targets)
    result = hungarian(cost)
    out = [VERSION_LINE]
    for pred_i, target_j in result.pairs:
        out.append(
            f"pair pred={pred_i} target={target_j} cost={cost[pred_i, target_j]:.6f}"
        )
    out.append(
        "unmatched_preds "
        + (" ".join(str(i) for i in result.unmatched_predictions) or "-")
    )
    out.append(
        "unmatched_targets "
        + (" ".join(str(j) for j in result.unmatched_targets) or "-")
    )
    out.append(f"total_cost {result.total_cost:.6f}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_nms(args) -> int:
    in_dir = _require_dir(Path(args.predictions), "predictions")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for entry in sorted(in_dir.iterdir()):
        if entry.suffix != ".txt" or not entry.is_file():
            continue
        kept = nms_filter(read_prediction_file(entry), args.iou)
        lines = [serialize_detection(d) for d in kept]
        (out_dir / entry.name).write_text(
            ("\n".join(lines) + "\n") if lines else "", encoding="utf-8"
        )
    return 0


def _write_eval_report(report: EvalReport, out_dir: Path, plots: bool) -> None:
    def fmt(value: float | None) -> str:
        return f"{value:.6f}" if value is not None else "undefined"

    rows = [VERSION_LINE, "class_id,class_name,iou_thr,ap"]
    for class_id, name in enumerate(report.class_names):
        for t in report.iou_thresholds:
            rows.append(f"{class_id},{name},{t:.2f},{fmt(report.ap[class_id][t])}")
    (out_dir / "report.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    thresholds = ",".join(f"{t:.2f}" for t in report.iou_thresholds)
    total_gt = sum(report.gt_counts.values())
    summary = [
        VERSION_LINE,
        f"confidence_threshold {report.confidence_threshold:.6f}",
        f"iou_thresholds {thresholds}",
        f"ground_truth_objects {total_gt}",
        f"detections_kept {report.detections_kept}",
        f"mAP50 {fmt(report.map50)}",
        f"mAP50_95 {fmt(report.map50_95)}",
    ]
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")

    curve_rows = [VERSION_LINE, "class_id,class_name,recall,precision"]
    for class_id, name in enumerate(report.class_names):
        for point in report.pr_curves.get(class_id, ()):
            curve_rows.append(
                f"{class_id},{name},{point.recall:.6f},{point.precision:.6f}"
            )
    (out_dir / "pr_curves.csv").write_text("\n".join(curve_rows) + "\n", encoding="utf-8")

    if plots:
        plot_dir = out_dir / "plots"
        plot_dir.mkdir(exist_ok=True)
        for class_id, name in enumerate(report.class_names):
            svg = pr_curve_svg(report.pr_curves.get(class_id, ()), f"{class_id} {name}")
            safe = "".join(ch if ch.isalnum() else "_" for ch in name)
            (plot_dir / f"pr_class_{class_id}_{safe}.svg").write_text(
                svg, encoding="utf-8"
            )


def pr_curve_svg(points, title: str) -> str:
    """Standalone SVG PR plot: unit-square axes with a recall/precision
    polyline; text-based so outputs stay diffable."""
    size, margin = 400, 50
    span = size - 2 * margin

    def px(r: float) -> float:
        return margin + r * span

    def py(p: float) -> float:
        return size - margin - p * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<!-- {VERSION_LINE[2:]} -->",
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{size / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
        f"PR curve {title}</text>",
        f'<line x1="{margin}" y1="{size - margin}" x2="{size - margin}" '
        f'y2="{size - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{size - margin}" '
        f'stroke="black"/>',
        f'<text x="{size / 2:.1f}" y="{size - 10}" text-anchor="middle" '
        f'font-size="12">recall</text>',
        f'<text x="15" y="{size / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {size / 2:.1f})">precision</text>',
    ]
    for i in range(6):
        v = i / 5.0
        parts.append(
            f'<text x="{px(v):.1f}" y="{size - margin + 16}" text-anchor="middle" '
            f'font-size="10">{v:.1f}</text>'
        )
        parts.append(
            f'<text x="{margin - 6}" y="{py(v) + 3:.1f}" text-anchor="end" '
            f'font-size="10">{v:.1f}</text>'
        )
    if points:
        coords = " ".join(f"{px(pt.recall):.2f},{py(pt.precision):.2f}" for pt in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_eval(args) -> int:
    root = _require_dir(Path(args.dataset), "dataset")
    preds_path = Path(args.predictions)
    if not preds_path.exists():
        raise CliUsageError(f"predictions path does not exist: {preds_path}")
    classes_file = Path(args.classes) if args.classes else root / "classes.txt"
    if not classes_file.is_file():
        raise CliUsageError(
            f"classes file not found: {classes_file} (pass --classes explicitly)"
        )
    dataset = load_dataset(root / "images", root / "labels", classes_file)
    predictions = load_predictions(preds_path, len(dataset.taxonomy))
    report = evaluate(
        predictions,
        dataset,
        conf_thr=args.conf,
        iou_thrs=DEFAULT_IOU_THRESHOLDS,
        nms_iou=args.nms,
    )
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_eval_report(report, out_dir, args.plots)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detkit",
        description="Detection dataset toolkit: enhancement, stats, splits, "
        "matching, NMS, and mAP evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"detkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="batch image enhancement (output PNG)")
    p.add_argument("--technique", required=True, choices=("he", "clahe", "gamma"))
    p.add_argument("--gamma", type=_positive_float, default=1.5,
                   help="gamma exponent (gamma technique; <1 brightens)")
    p.add_argument("--tiles", type=_tiles, default=(8, 8),
                   help="CLAHE tile grid as COLSxROWS (default 8x8)")
    p.add_argument("--clip", type=float, default=2.0,
                   help="CLAHE clip limit, multiple of the mean bin count; "
                   "<= 0 disables clipping (default 2.0)")
    p.add_argument("input", help="directory of PNG/JPEG images")
    p.add_argument("output", help="output directory (PNGs + manifest.txt)")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("stats", help="class distribution report (CSV)")
    p.add_argument("dataset", help="dataset root containing images/ and labels/")
    p.add_argument("--classes", required=True, help="classes file (one name per line)")
    p.add_argument("--output", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="leakage-free train/val split")
    p.add_argument("dataset", help="dataset root containing images/")
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=43)
    p.add_argument("output", help="output directory (train.txt, val.txt)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("match", help="one-to-one assignment for one image")
    p.add_argument("labels", help="ground-truth label file")
    p.add_argument("predictions", help="prediction file (class cx cy w h conf)")
    p.add_argument("--classes", help="classes file fixing the class count")
    p.add_argument("--num-classes", type=int,
                   help="class count when no classes file is given")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("nms", help="non-maximum suppression over a prediction tree")
    p.add_argument("predictions", help="directory of per-image prediction files")
    p.add_argument("--iou", type=_fraction, default=0.5)
    p.add_argument("output", help="output directory for filtered files")
    p.set_defaults(func=cmd_nms)

    p = sub.add_parser("eval", help="mAP evaluation report")
    p.add_argument("dataset",
                   help="dataset root containing images/, labels/ and classes.txt")
    p.add_argument("predictions",
                   help="directory of per-image files or one aggregate file")
    p.add_argument("--conf", type=_fraction, default=0.4,
                   help="confidence threshold (default 0.4)")
    p.add_argument("--nms", type=_fraction, default=None,
                   help="enable NMS at this IoU before scoring")
    p.add_argument("--plots", action="store_true", help="emit SVG PR curves")
    p.add_argument("--classes", help="classes file (default: DATASET/classes.txt)")
    p.add_argument("output", help="report output directory")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"usage: run 'detkit {args.command} --help'", file=sys.stderr)
        return 2
    except (DatasetLoadError, LabelFormatError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
