"""Box overlap metrics shared by assignment and evaluation."""

from __future__ import annotations

from .annotations import NormBox, PixelBox


def iou(a: PixelBox, b: PixelBox) -> float:
    """Intersection over union, 0 for disjoint boxes."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def giou(a: PixelBox, b: PixelBox) -> float:
    """Generalized IoU: IoU minus the enclosing-box penalty, in (-1, 1]."""
    enclose = (max(a.x2, b.x2) - min(a.x1, b.x1)) * (max(a.y2, b.y2) - min(a.y1, b.y1))
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = ix * iy if (ix > 0.0 and iy > 0.0) else 0.0
    union = a.area + b.area - inter
    base = inter / union if inter > 0.0 else 0.0
    return base - (enclose - union) / enclose


def l1_box_distance(a: NormBox, b: NormBox) -> float:
    """Sum of absolute differences of the four normalized box fields."""
    return (
        abs(a.cx - b.cx) + abs(a.cy - b.cy) + abs(a.w - b.w) + abs(a.h - b.h)
    )
