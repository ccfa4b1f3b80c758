"""Walkthrough: YOLO label parsing, validation, and round-trip serialization.

Builds a tiny label tree on disk, loads it into the dataset model, shows how
malformed lines are reported with file/line context, and demonstrates the
normalized-to-pixel box conversion.
"""

import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from detkit import (
    DatasetLoadError,
    NormBox,
    load_dataset,
    parse_label_line,
    serialize_annotation,
    to_pixel_box,
)


def main():
    print("== parsing a single label line ==")
    ann = parse_label_line("2 0.500000 0.400000 0.300000 0.200000", class_count=13)
    print("parsed:", ann)
    print("re-serialized:", serialize_annotation(ann))

    print("\n== pixel conversion for a 1280x720 frame ==")
    box = to_pixel_box(ann.box, 1280, 720)
    print(f"pixel corners: ({box.x1:.1f}, {box.y1:.1f}) -> ({box.x2:.1f}, {box.y2:.1f})")

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        (root / "images").mkdir()
        (root / "labels").mkdir()
        blank = Image.fromarray(np.zeros((90, 160), dtype=np.uint8))
        for image_id in ("town_a_001", "town_a_002", "town_b_010"):
            blank.save(root / "images" / f"{image_id}.png")
        (root / "labels" / "town_a_001.txt").write_text(
            "0 0.5 0.5 0.25 0.25\n1 0.2 0.3 0.1 0.1\n"
        )
        # town_a_002 has no label file: that means zero objects, not an error
        (root / "labels" / "town_b_010.txt").write_text("2 0.7 0.7 0.2 0.2\n")
        (root / "classes.txt").write_text("car\nrickshaw\nperson\n")

        print("\n== loading the dataset tree ==")
        ds = load_dataset(root / "images", root / "labels", root / "classes.txt")
        for rec in ds.records:
            print(
                f"{rec.image_id}: {rec.width}x{rec.height}, "
                f"{len(rec.annotations)} objects, scene group '{rec.group_key}'"
            )

        print("\n== malformed lines carry their location ==")
        (root / "labels" / "town_a_001.txt").write_text("0 0.5 0.5 0.25\n")
        try:
            load_dataset(root / "images", root / "labels", root / "classes.txt")
        except DatasetLoadError as exc:
            print("caught:", exc)

    print("\n== invariants are enforced at construction ==")
    try:
        NormBox(0.95, 0.5, 0.2, 0.1)  # sticks out of the unit square
    except ValueError as exc:
        print("rejected box:", exc)


if __name__ == "__main__":
    main()
