"""Walkthrough: confidence-thresholded mAP evaluation.

Scores a small set of detections against two annotated images, shows what
the 0.4 confidence threshold does to the detection set entering the metric,
and writes one SVG precision-recall curve per class to
demos/output/evaluation/.
"""

from pathlib import Path

from detkit import (
    Annotation,
    ClassTaxonomy,
    Dataset,
    Detection,
    ImageRecord,
    NormBox,
    evaluate,
)
from detkit.cli import pr_curve_svg

OUT = Path(__file__).parent / "output" / "evaluation"


def build_scene():
    taxonomy = ClassTaxonomy(("car", "rickshaw"))
    records = (
        ImageRecord("road_a_001", 1280, 720, (
            Annotation(0, NormBox(0.30, 0.30, 0.20, 0.20)),
            Annotation(0, NormBox(0.70, 0.70, 0.20, 0.20)),
            Annotation(1, NormBox(0.50, 0.50, 0.40, 0.40)),
        ), "road_a"),
        ImageRecord("road_a_002", 1280, 720, (
            Annotation(0, NormBox(0.40, 0.40, 0.20, 0.20)),
        ), "road_a"),
    )
    predictions = {
        "road_a_001": [
            Detection(0, 0.90, NormBox(0.30, 0.30, 0.20, 0.20)),  # clean hit
            Detection(0, 0.80, NormBox(0.72, 0.70, 0.20, 0.20)),  # slightly off
            Detection(1, 0.70, NormBox(0.50, 0.50, 0.40, 0.40)),  # clean hit
            Detection(0, 0.35, NormBox(0.10, 0.80, 0.10, 0.10)),  # low-conf noise
        ],
        "road_a_002": [
            Detection(0, 0.60, NormBox(0.50, 0.40, 0.20, 0.20)),  # drifted, IoU 1/3
            Detection(0, 0.50, NormBox(0.40, 0.40, 0.20, 0.20)),  # clean hit
        ],
    }
    return Dataset(taxonomy, records), predictions


def main():
    dataset, predictions = build_scene()

    for conf in (0.0, 0.4):
        report = evaluate(predictions, dataset, conf_thr=conf)
        print(f"confidence threshold {conf:.1f}: "
              f"{report.detections_kept} detections enter matching, "
              f"mAP@0.5 = {report.map50:.4f}, "
              f"mAP@[.5:.95] = {report.map50_95:.4f}")

    report = evaluate(predictions, dataset, conf_thr=0.4)
    print("\nper-class AP at IoU 0.5:")
    for class_id, name in enumerate(report.class_names):
        print(f"  {name}: {report.ap[class_id][0.5]:.4f} "
              f"({report.gt_counts[class_id]} objects)")

    OUT.mkdir(parents=True, exist_ok=True)
    for class_id, name in enumerate(report.class_names):
        path = OUT / f"pr_{name}.svg"
        path.write_text(pr_curve_svg(report.pr_curves[class_id], f"{class_id} {name}"))
        print("wrote", path)

    print("\nThe 0.4 threshold drops the low-confidence noise box without")
    print("costing any mAP here: it ranked last, so the precision envelope")
    print("never saw it. The off-center car detection counts as a hit at")
    print("IoU 0.5 but flips to a false positive at stricter thresholds,")
    print("which is why the [.5:.95] mean sits below the 0.5 score.")


if __name__ == "__main__":
    main()
