"""Detection scoring: confidence filtering, NMS, greedy matching, PR curves,
per-class AP, and mAP over an IoU-threshold grid.

The scoring pipeline is filter_by_confidence -> optional nms -> per-image,
per-class greedy matching -> dataset-wide per-class pooling -> 101-point
interpolated average precision. Detections are canonically ordered by
(confidence desc, class, cx, cy, w, h) before matching, and pooled flags are
sorted by (confidence desc, image id, per-image index), so the report never
depends on input order. IoU is computed on the unit square, which equals
pixel-space IoU for boxes normalized by one image size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .annotations import (
    Annotation,
    Dataset,
    DatasetLoadError,
    Detection,
    LabelFormatError,
    parse_prediction_line,
    to_pixel_box,
)
from .geometry import iou

DEFAULT_CONFIDENCE_THRESHOLD = 0.4
DEFAULT_IOU_THRESHOLDS = (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)

# 101-point interpolation grid {0, 0.01, ..., 1.00}
_RECALL_GRID = tuple(i / 100.0 for i in range(101))


class EvaluationError(ValueError):
    """Inconsistent evaluation inputs (unknown image ids, bad thresholds)."""


@dataclass(frozen=True)
class PRPoint:
    recall: float
    precision: float

    def __post_init__(self):
        if not (0.0 <= self.recall <= 1.0 and 0.0 <= self.precision <= 1.0):
            raise ValueError(
                f"PR point outside unit square: ({self.recall}, {self.precision})"
            )


@dataclass(frozen=True)
class EvalReport:
    """Scoring summary.

    ap maps class id -> iou threshold -> AP; the AP is None when the class
    has no ground truth and no detections. Classes with zero ground truth
    are excluded from the mAP means (an AP of 0.0 is still reported when
    such a class has detections). map50 is the class mean at threshold 0.5;
    map50_95 the mean over every evaluated threshold.
    """

    iou_thresholds: tuple[float, ...]
    class_names: tuple[str, ...]
    ap: dict[int, dict[float, float | None]]
    map50: float | None
    map50_95: float | None
    gt_counts: dict[int, int]
    detections_kept: int
    confidence_threshold: float
    pr_curves: dict[int, tuple[PRPoint, ...]]


def filter_by_confidence(dets: Sequence[Detection], thr: float) -> list[Detection]:
    """Detections with confidence >= thr (inclusive), order preserved."""
    if not (0.0 <= thr <= 1.0):
        raise ValueError(f"confidence threshold outside [0, 1]: {thr}")
    return [d for d in dets if d.confidence >= thr]


def _unit_box(det_or_box):
    box = det_or_box.box if hasattr(det_or_box, "box") else det_or_box
    return to_pixel_box(box, 1.0, 1.0)


def nms(dets: Sequence[Detection], iou_thr: float) -> list[Detection]:
    """Greedy per-class non-maximum suppression.

    Within each class, detections are visited by descending confidence
    (ties keep input order); a detection is dropped when its IoU with any
    kept same-class box exceeds iou_thr. Kept detections are returned in
    input order.
    """
    if not (0.0 <= iou_thr <= 1.0):
        raise ValueError(f"IoU threshold outside [0, 1]: {iou_thr}")
    boxes = [_unit_box(d) for d in dets]
    keep = [False] * len(dets)
    by_class: dict[int, list[int]] = {}
    for i, d in enumerate(dets):
        by_class.setdefault(d.class_id, []).append(i)
    for indices in by_class.values():
        order = sorted(indices, key=lambda i: (-dets[i].confidence, i))
        kept: list[int] = []
        for i in order:
            if all(iou(boxes[i], boxes[j]) <= iou_thr for j in kept):
                kept.append(i)
                keep[i] = True
    return [d for i, d in enumerate(dets) if keep[i]]


def match_detections(
    dets: Sequence[Detection], gts: Sequence[Annotation], iou_thr: float
) -> tuple[list[bool], int]:
    """Greedy TP/FP matching for one image and one class.

    Detections are processed by descending confidence (ties keep input
    order); each is a true positive when its best-IoU unmatched ground
    truth reaches iou_thr (equal best IoUs go to the lowest ground-truth
    index), and that ground truth is consumed. Returns flags aligned with
    the input order plus the number of unmatched ground truths.
    """
    det_boxes = [_unit_box(d) for d in dets]
    gt_boxes = [_unit_box(g) for g in gts]
    flags = [False] * len(dets)
    gt_taken = [False] * len(gts)
    for i in sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i)):
        best_j = -1
        best = 0.0
        for j in range(len(gts)):
            if gt_taken[j]:
                continue
            overlap = iou(det_boxes[i], gt_boxes[j])
            if overlap > best:
                best = overlap
                best_j = j
        if best_j >= 0 and best >= iou_thr:
            flags[i] = True
            gt_taken[best_j] = True
    return flags, gt_taken.count(False)


def average_precision(flags: Sequence[bool], num_gt: int) -> float | None:
    """101-point interpolated AP of a confidence-sorted TP/FP sequence.

    Interpolated precision at recall r is the maximum precision among
    points with recall >= r (0 when none). Returns None (undefined) when
    there is neither ground truth nor detections; 0.0 when detections exist
    without ground truth.
    """
    if num_gt < 0:
        raise ValueError(f"num_gt must be >= 0, got {num_gt}")
    if num_gt == 0:
        return None if not flags else 0.0
    if not flags:
        return 0.0
    recalls = []
    precisions = []
    tp = 0
    for k, flag in enumerate(flags, start=1):
        tp += int(flag)
        recalls.append(tp / num_gt)
        precisions.append(tp / k)
    # max precision over the suffix with recall >= r; recalls are sorted
    suffix_max = list(precisions)
    for k in range(len(suffix_max) - 2, -1, -1):
        suffix_max[k] = max(suffix_max[k], suffix_max[k + 1])
    total = 0.0
    k = 0
    n = len(recalls)
    for r in _RECALL_GRID:
        while k < n and recalls[k] < r:
            k += 1
        if k < n:
            total += suffix_max[k]
    return total / len(_RECALL_GRID)


def _canonical_order(dets: Sequence[Detection]) -> list[Detection]:
    return sorted(
        dets,
        key=lambda d: (-d.confidence, d.class_id, d.box.cx, d.box.cy, d.box.w, d.box.h),
    )


def evaluate(
    predictions: Mapping[str, Sequence[Detection]],
    gts: Dataset,
    conf_thr: float = DEFAULT_CONFIDENCE_THRESHOLD,
    iou_thrs: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
    nms_iou: float | None = None,
) -> EvalReport:
    """Score per-image detections against a dataset.

    NMS is off by default (set-prediction outputs need none) and enabled by
    passing nms_iou. PR curves are reported at the first IoU threshold.
    """
    if not iou_thrs:
        raise EvaluationError("need at least one IoU threshold")
    known = {rec.image_id for rec in gts.records}
    unknown = sorted(set(predictions) - known)
    if unknown:
        raise EvaluationError(f"predictions for unknown image ids: {', '.join(unknown)}")
    thresholds = tuple(float(t) for t in iou_thrs)
    class_ids = range(len(gts.taxonomy))

    # pooled (sort key, flag) entries per class and threshold
    pooled: dict[int, dict[float, list]] = {
        c: {t: [] for t in thresholds} for c in class_ids
    }
    gt_counts = {c: 0 for c in class_ids}
    detections_kept = 0
    for rec in gts.records:
        for ann in rec.annotations:
            gt_counts[ann.class_id] += 1
        dets = filter_by_confidence(predictions.get(rec.image_id, []), conf_thr)
        if nms_iou is not None:
            dets = nms(dets, nms_iou)
        dets = _canonical_order(dets)
        detections_kept += len(dets)
        by_class: dict[int, list[tuple[int, Detection]]] = {}
        for idx, det in enumerate(dets):
            by_class.setdefault(det.class_id, []).append((idx, det))
        gts_by_class: dict[int, list[Annotation]] = {}
        for ann in rec.annotations:
            gts_by_class.setdefault(ann.class_id, []).append(ann)
        for class_id, items in by_class.items():
            class_dets = [det for _, det in items]
            class_gts = gts_by_class.get(class_id, [])
            for t in thresholds:
                flags, _ = match_detections(class_dets, class_gts, t)
                for (idx, det), flag in zip(items, flags):
                    pooled[class_id][t].append(
                        ((-det.confidence, rec.image_id, idx), flag)
                    )

    ap: dict[int, dict[float, float | None]] = {}
    pr_curves: dict[int, tuple[PRPoint, ...]] = {}
    for c in class_ids:
        ap[c] = {}
        for t in thresholds:
            entries = sorted(pooled[c][t])
            flags = [flag for _, flag in entries]
            ap[c][t] = average_precision(flags, gt_counts[c])
        pr_curves[c] = _pr_curve(
            [flag for _, flag in sorted(pooled[c][thresholds[0]])], gt_counts[c]
        )

    scored = [c for c in class_ids if gt_counts[c] > 0]
    map50 = None
    if 0.5 in thresholds and scored:
        map50 = math.fsum(ap[c][0.5] for c in scored) / len(scored)
    map50_95 = None
    if scored:
        map50_95 = math.fsum(
            ap[c][t] for c in scored for t in thresholds
        ) / (len(scored) * len(thresholds))
    return EvalReport(
        iou_thresholds=thresholds,
        class_names=gts.taxonomy.names,
        ap=ap,
        map50=map50,
        map50_95=map50_95,
        gt_counts=gt_counts,
        detections_kept=detections_kept,
        confidence_threshold=conf_thr,
        pr_curves=pr_curves,
    )


def _pr_curve(flags: Sequence[bool], num_gt: int) -> tuple[PRPoint, ...]:
    if num_gt == 0:
        return ()
    points = []
    tp = 0
    for k, flag in enumerate(flags, start=1):
        tp += int(flag)
        points.append(PRPoint(recall=tp / num_gt, precision=tp / k))
    return tuple(points)


def read_prediction_file(
    path: str | Path, class_count: int | None = None
) -> tuple[Detection, ...]:
    """Parse one per-image prediction file (``class cx cy w h conf`` lines)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetLoadError(f"cannot read prediction file {path}: {exc}") from exc
    dets = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            dets.append(parse_prediction_line(line, class_count))
        except LabelFormatError as exc:
            raise DatasetLoadError(f"{path}:{lineno}: {exc}") from None
    return tuple(dets)


def load_predictions(
    path: str | Path, class_count: int | None = None
) -> dict[str, list[Detection]]:
    """Load predictions from a directory of per-image ``<image_id>.txt``
    files, or from one aggregate file whose lines carry a leading image id:
    ``image_id class cx cy w h conf``."""
    path = Path(path)
    result: dict[str, list[Detection]] = {}
    if path.is_dir():
        for entry in sorted(path.iterdir()):
            if entry.suffix == ".txt" and entry.is_file():
                result[entry.stem] = list(read_prediction_file(entry, class_count))
        return result
    if not path.is_file():
        raise DatasetLoadError(f"predictions path does not exist: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetLoadError(f"cannot read predictions file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(maxsplit=1)
        if len(parts) != 2:
            raise DatasetLoadError(f"{path}:{lineno}: expected 7 fields, got 1")
        image_id, rest = parts
        try:
            det = parse_prediction_line(rest, class_count)
        except LabelFormatError as exc:
            raise DatasetLoadError(f"{path}:{lineno}: {exc}") from None
        result.setdefault(image_id, []).append(det)
    return result
