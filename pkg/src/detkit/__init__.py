"""Detection dataset toolkit.

Library surface for the full deterministic detection workflow around a
YOLO-format dataset: annotation parsing and validation, image enhancement
(histogram equalization, CLAHE, gamma), leakage-free dataset splitting,
one-to-one and one-to-many label assignment, and confidence-thresholded
mAP evaluation. See the demos/ directory for narrative walkthroughs and
the ``detkit`` command for the batch front end.
"""

__version__ = "0.1.0"

from .annotations import (
    Annotation,
    ClassTaxonomy,
    Dataset,
    DatasetLoadError,
    Detection,
    ImageRecord,
    LabelFormatError,
    NormBox,
    PixelBox,
    from_pixel_box,
    load_dataset,
    parse_label_line,
    parse_prediction_line,
    serialize_annotation,
    serialize_detection,
    to_pixel_box,
)
from .assignment import (
    IGNORE,
    NEGATIVE,
    AssignmentResult,
    CandidatePrediction,
    CostWeights,
    OneToManyLabels,
    brute_force_assign,
    hungarian,
    match_cost_matrix,
    max_iou_assign,
    topk_iou_assign,
)
from .datasetops import (
    SplitConfig,
    SplitResult,
    StatsReport,
    class_distribution,
    grouped_split,
    scene_group_key,
    split_ids,
)
from .evaluation import (
    DEFAULT_CONFIDENCE_THRESHOLD,
    DEFAULT_IOU_THRESHOLDS,
    EvalReport,
    EvaluationError,
    PRPoint,
    average_precision,
    evaluate,
    filter_by_confidence,
    load_predictions,
    match_detections,
    nms,
)
from .geometry import giou, iou, l1_box_distance
from .imageops import (
    ClaheParams,
    GammaValue,
    Raster,
    apply_on_luma,
    clahe,
    clip_histogram,
    equalize_hist,
    gamma_correct,
    histogram,
)

__all__ = [
    "__version__",
    "Annotation",
    "AssignmentResult",
    "CandidatePrediction",
    "ClaheParams",
    "ClassTaxonomy",
    "CostWeights",
    "Dataset",
    "DatasetLoadError",
    "Detection",
    "DEFAULT_CONFIDENCE_THRESHOLD",
    "DEFAULT_IOU_THRESHOLDS",
    "EvalReport",
    "EvaluationError",
    "GammaValue",
    "IGNORE",
    "ImageRecord",
    "LabelFormatError",
    "NEGATIVE",
    "NormBox",
    "OneToManyLabels",
    "PRPoint",
    "PixelBox",
    "Raster",
    "SplitConfig",
    "SplitResult",
    "StatsReport",
    "apply_on_luma",
    "average_precision",
    "brute_force_assign",
    "clahe",
    "class_distribution",
    "clip_histogram",
    "equalize_hist",
    "evaluate",
    "filter_by_confidence",
    "from_pixel_box",
    "gamma_correct",
    "giou",
    "grouped_split",
    "histogram",
    "hungarian",
    "iou",
    "l1_box_distance",
    "load_dataset",
    "load_predictions",
    "match_cost_matrix",
    "match_detections",
    "max_iou_assign",
    "nms",
    "parse_label_line",
    "parse_prediction_line",
    "scene_group_key",
    "serialize_annotation",
    "serialize_detection",
    "split_ids",
    "to_pixel_box",
    "topk_iou_assign",
]
