"""YOLO-format labels: domain types, parsing, serialization, dataset loading.

Label files carry one object per line, ``class cx cy w h`` with box fields
normalized to the image size. Prediction files append a sixth field, the
confidence in [0, 1]. A classes file maps line index to class id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from PIL import Image, UnidentifiedImageError

# Boxes may exceed the unit square by this much (float noise in real
# exports); anything beyond is rejected.
COORD_EPS = 1e-6

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class LabelFormatError(ValueError):
    """A label or prediction line violates the format contract."""


class DatasetLoadError(Exception):
    """A dataset tree could not be loaded; message carries file context."""


@dataclass(frozen=True)
class ClassTaxonomy:
    """Ordered class names; list index is the class id."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("taxonomy must contain at least one class")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def from_file(cls, path: str | Path) -> "ClassTaxonomy":
        path = Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise DatasetLoadError(f"cannot read classes file {path}: {exc}") from exc
        names = [ln.strip() for ln in lines]
        while names and not names[-1]:
            names.pop()
        for i, name in enumerate(names):
            if not name:
                raise DatasetLoadError(f"{path}:{i + 1}: empty class name")
        if not names:
            raise DatasetLoadError(f"{path}: classes file is empty")
        try:
            return cls(tuple(names))
        except ValueError as exc:
            raise DatasetLoadError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class NormBox:
    """Axis-aligned box as fractions of the image: center, width, height."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite: {v!r}")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"center ({self.cx}, {self.cy}) outside [0, 1]")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"size ({self.w}, {self.h}) outside (0, 1]")
        if self.cx - self.w / 2 < -COORD_EPS or self.cx + self.w / 2 > 1.0 + COORD_EPS:
            raise ValueError(f"box exceeds unit square in x: cx={self.cx} w={self.w}")
        if self.cy - self.h / 2 < -COORD_EPS or self.cy + self.h / 2 > 1.0 + COORD_EPS:
            raise ValueError(f"box exceeds unit square in y: cy={self.cy} h={self.h}")


@dataclass(frozen=True)
class PixelBox:
    """Corner-form box in continuous pixel coordinates, strictly positive area."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(
                f"degenerate box ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class Annotation:
    """One ground-truth object: class id plus normalized box."""

    class_id: int
    box: NormBox

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class id must be non-negative, got {self.class_id}")


@dataclass(frozen=True)
class Detection:
    """One predicted object: class id, confidence, normalized box."""

    class_id: int
    confidence: float
    box: NormBox

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class id must be non-negative, got {self.class_id}")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence outside [0, 1]: {self.confidence!r}")


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: int
    height: int
    annotations: tuple[Annotation, ...]
    group_key: str

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"image {self.image_id!r}: non-positive size {self.width}x{self.height}"
            )


@dataclass(frozen=True)
class Dataset:
    taxonomy: ClassTaxonomy
    records: tuple[ImageRecord, ...] = field(default=())

    def __post_init__(self):
        seen = set()
        k = len(self.taxonomy)
        for rec in self.records:
            if rec.image_id in seen:
                raise ValueError(f"duplicate image id {rec.image_id!r}")
            seen.add(rec.image_id)
            for ann in rec.annotations:
                if ann.class_id >= k:
                    raise ValueError(
                        f"image {rec.image_id!r}: class id {ann.class_id} "
                        f"outside taxonomy of {k} classes"
                    )

    def __len__(self) -> int:
        return len(self.records)


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise LabelFormatError(f"malformed {what}: {token!r}") from None


def _parse_float(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise LabelFormatError(f"malformed {what}: {token!r}") from None


def parse_label_line(line: str, class_count: int) -> Annotation:
    """Parse one ``class cx cy w h`` label line.

    Raises LabelFormatError on a wrong field count, malformed numbers, a
    class id outside [0, class_count), or box fields that violate the
    normalized-box invariants.
    """
    tokens = line.split()
    if len(tokens) != 5:
        raise LabelFormatError(f"expected 5 fields, got {len(tokens)}")
    class_id = _parse_int(tokens[0], "class id")
    coords = [_parse_float(t, f"coordinate {i + 1}") for i, t in enumerate(tokens[1:])]
    if not (0 <= class_id < class_count):
        raise LabelFormatError(
            f"class id {class_id} outside [0, {class_count})"
        )
    try:
        box = NormBox(*coords)
    except ValueError as exc:
        raise LabelFormatError(str(exc)) from None
    return Annotation(class_id, box)


def parse_prediction_line(line: str, class_count: int | None = None) -> Detection:
    """Parse one ``class cx cy w h conf`` prediction line.

    With class_count=None the upper bound on the class id is not checked
    (used by commands that run without a taxonomy).
    """
    tokens = line.split()
    if len(tokens) != 6:
        raise LabelFormatError(f"expected 6 fields, got {len(tokens)}")
    class_id = _parse_int(tokens[0], "class id")
    coords = [_parse_float(t, f"coordinate {i + 1}") for i, t in enumerate(tokens[1:5])]
    conf = _parse_float(tokens[5], "confidence")
    if class_id < 0 or (class_count is not None and class_id >= class_count):
        bound = class_count if class_count is not None else "inf"
        raise LabelFormatError(f"class id {class_id} outside [0, {bound})")
    try:
        box = NormBox(*coords)
        return Detection(class_id, conf, box)
    except ValueError as exc:
        raise LabelFormatError(str(exc)) from None


def serialize_annotation(a: Annotation) -> str:
    """Canonical label line, box fields at 6 decimal places."""
    b = a.box
    return f"{a.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}"


def serialize_detection(d: Detection) -> str:
    """Canonical prediction line, box and confidence at 6 decimal places."""
    b = d.box
    return (
        f"{d.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f} {d.confidence:.6f}"
    )


def to_pixel_box(b: NormBox, width: float, height: float) -> PixelBox:
    """Convert a normalized box to corner form, clamped to the image.

    Raises ValueError if the box degenerates to zero area after clamping.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"non-positive image size {width}x{height}")
    x1 = max(0.0, min(float(width), (b.cx - b.w / 2) * width))
    x2 = max(0.0, min(float(width), (b.cx + b.w / 2) * width))
    y1 = max(0.0, min(float(height), (b.cy - b.h / 2) * height))
    y2 = max(0.0, min(float(height), (b.cy + b.h / 2) * height))
    if not (x1 < x2 and y1 < y2):
        raise ValueError(f"box degenerates to zero area at {width}x{height}")
    return PixelBox(x1, y1, x2, y2)


def from_pixel_box(p: PixelBox, width: float, height: float) -> NormBox:
    """Inverse of to_pixel_box for boxes inside the image."""
    if width <= 0 or height <= 0:
        raise ValueError(f"non-positive image size {width}x{height}")
    return NormBox(
        cx=(p.x1 + p.x2) / 2 / width,
        cy=(p.y1 + p.y2) / 2 / height,
        w=(p.x2 - p.x1) / width,
        h=(p.y2 - p.y1) / height,
    )


def _image_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as img:
            return img.size
    except (OSError, UnidentifiedImageError) as exc:
        raise DatasetLoadError(f"cannot read image {path}: {exc}") from exc


def list_image_ids(images_dir: str | Path) -> list[tuple[str, Path]]:
    """Sorted (image_id, path) pairs for the images in a directory."""
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise DatasetLoadError(f"not a directory: {images_dir}")
    by_stem: dict[str, Path] = {}
    for entry in sorted(images_dir.iterdir()):
        if not entry.is_file() or entry.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        if entry.stem in by_stem:
            raise DatasetLoadError(
                f"duplicate image id {entry.stem!r}: {by_stem[entry.stem].name} "
                f"and {entry.name}"
            )
        by_stem[entry.stem] = entry
    return sorted(by_stem.items())


def read_label_file(path: str | Path, class_count: int) -> tuple[Annotation, ...]:
    """Parse a label file; blank lines are ignored, malformed lines raise
    DatasetLoadError with file and line number."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetLoadError(f"cannot read label file {path}: {exc}") from exc
    annotations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            annotations.append(parse_label_line(line, class_count))
        except LabelFormatError as exc:
            raise DatasetLoadError(f"{path}:{lineno}: {exc}") from None
    return tuple(annotations)


def load_dataset(
    images_dir: str | Path,
    labels_dir: str | Path,
    classes_file: str | Path,
    group_key: Callable[[str], str] | None = None,
) -> Dataset:
    """Build a Dataset from a YOLO-style directory pair plus a classes file.

    Every image in images_dir yields one record; a missing label file means
    an image with zero objects. Records are ordered lexicographically by
    image id, so two loads of the same tree are identical.
    """
    if group_key is None:
        from .datasetops import scene_group_key

        group_key = scene_group_key
    labels_dir = Path(labels_dir)
    if not labels_dir.is_dir():
        raise DatasetLoadError(f"not a directory: {labels_dir}")
    taxonomy = ClassTaxonomy.from_file(classes_file)
    records = []
    for image_id, image_path in list_image_ids(images_dir):
        width, height = _image_size(image_path)
        label_path = labels_dir / f"{image_id}.txt"
        annotations: tuple[Annotation, ...] = ()
        if label_path.exists():
            annotations = read_label_file(label_path, len(taxonomy))
        records.append(
            ImageRecord(image_id, width, height, annotations, group_key(image_id))
        )
    return Dataset(taxonomy, tuple(records))
