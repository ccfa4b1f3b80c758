import random

import numpy as np
import pytest
from PIL import Image

from detkit import (
    Annotation,
    ClassTaxonomy,
    DatasetLoadError,
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
from conftest import random_annotation


class TestParseLabelLine:
    def test_basic_line(self):
        ann = parse_label_line("0 0.5 0.5 0.2 0.1", 13)
        assert ann == Annotation(0, NormBox(0.5, 0.5, 0.2, 0.1))

    def test_class_id_out_of_range(self):
        with pytest.raises(LabelFormatError, match="class id 13"):
            parse_label_line("13 0.5 0.5 0.2 0.1", 13)

    def test_width_above_one(self):
        with pytest.raises(LabelFormatError, match="size"):
            parse_label_line("2 0.5 0.5 1.2 0.1", 13)

    def test_wrong_field_count(self):
        with pytest.raises(LabelFormatError, match="expected 5 fields"):
            parse_label_line("0 0.5 0.5 0.2", 13)

    def test_malformed_number(self):
        with pytest.raises(LabelFormatError, match="malformed"):
            parse_label_line("0 0.5 abc 0.2 0.1", 13)

    def test_non_integer_class(self):
        with pytest.raises(LabelFormatError, match="malformed class id"):
            parse_label_line("1.5 0.5 0.5 0.2 0.1", 13)

    def test_box_leaking_outside_unit_square(self):
        # cx + w/2 = 1.05 is far beyond the 1e-6 tolerance
        with pytest.raises(LabelFormatError):
            parse_label_line("0 0.95 0.5 0.2 0.1", 13)

    def test_tolerates_float_noise_at_border(self):
        ann = parse_label_line("0 0.9999995 0.5 0.000001 0.1", 13)
        assert ann.box.cx == pytest.approx(0.9999995)


class TestSerialization:
    def test_canonical_line(self):
        ann = Annotation(0, NormBox(0.5, 0.5, 0.2, 0.1))
        assert serialize_annotation(ann) == "0 0.500000 0.500000 0.200000 0.100000"

    def test_boundary_annotation_round_trips(self):
        ann = Annotation(12, NormBox(1.0, 1.0, 0.000001, 0.000001))
        line = serialize_annotation(ann)
        back = parse_label_line(line, 13)
        assert back.class_id == 12
        assert back.box.w > 0

    def test_round_trip_1000_random(self):
        rng = random.Random(99)
        for _ in range(1000):
            ann = random_annotation(rng)
            back = parse_label_line(serialize_annotation(ann), 13)
            assert back.class_id == ann.class_id
            for field in ("cx", "cy", "w", "h"):
                assert abs(getattr(back.box, field) - getattr(ann.box, field)) <= 1e-6

    def test_detection_round_trip(self):
        from detkit import Detection

        det = Detection(3, 0.738912, NormBox(0.25, 0.25, 0.1, 0.1))
        back = parse_prediction_line(serialize_detection(det), 13)
        assert back.class_id == det.class_id
        assert abs(back.confidence - det.confidence) <= 1e-6


class TestPredictionLine:
    def test_parses_confidence(self):
        det = parse_prediction_line("2 0.5 0.5 0.2 0.2 0.85", 13)
        assert det.class_id == 2
        assert det.confidence == 0.85

    def test_rejects_confidence_above_one(self):
        with pytest.raises(LabelFormatError):
            parse_prediction_line("2 0.5 0.5 0.2 0.2 1.5", 13)

    def test_unbounded_class_when_no_taxonomy(self):
        det = parse_prediction_line("42 0.5 0.5 0.2 0.2 0.5", None)
        assert det.class_id == 42

    def test_field_count(self):
        with pytest.raises(LabelFormatError, match="expected 6 fields"):
            parse_prediction_line("2 0.5 0.5 0.2 0.2", 13)


class TestPixelConversion:
    def test_hand_computed(self):
        box = to_pixel_box(NormBox(0.5, 0.5, 0.5, 0.5), 100, 200)
        assert (box.x1, box.y1, box.x2, box.y2) == (25, 50, 75, 150)

    def test_full_image_box(self):
        box = to_pixel_box(NormBox(0.5, 0.5, 1.0, 1.0), 640, 480)
        assert (box.x1, box.y1, box.x2, box.y2) == (0, 0, 640, 480)

    def test_inverse_round_trip(self):
        rng = random.Random(5)
        for _ in range(300):
            ann = random_annotation(rng)
            w, h = rng.randint(1, 4000), rng.randint(1, 4000)
            back = from_pixel_box(to_pixel_box(ann.box, w, h), w, h)
            for field in ("cx", "cy", "w", "h"):
                assert abs(getattr(back, field) - getattr(ann.box, field)) <= 1e-9

    def test_rejects_non_positive_size(self):
        with pytest.raises(ValueError):
            to_pixel_box(NormBox(0.5, 0.5, 0.5, 0.5), 0, 100)


class TestBoxInvariants:
    def test_pixel_box_requires_positive_area(self):
        with pytest.raises(ValueError):
            PixelBox(5, 0, 5, 10)

    def test_norm_box_rejects_nan(self):
        with pytest.raises(ValueError):
            NormBox(float("nan"), 0.5, 0.2, 0.2)

    def test_norm_box_rejects_zero_width(self):
        with pytest.raises(ValueError):
            NormBox(0.5, 0.5, 0.0, 0.2)


def _write_image(path, width=8, height=6):
    arr = np.zeros((height, width), dtype=np.uint8)
    Image.fromarray(arr).save(path, format="PNG")


def _make_tree(tmp_path, labels: dict[str, str], classes="a\nb\nc\n"):
    images = tmp_path / "images"
    label_dir = tmp_path / "labels"
    images.mkdir(exist_ok=True)
    label_dir.mkdir(exist_ok=True)
    for image_id, label_text in labels.items():
        _write_image(images / f"{image_id}.png")
        if label_text is not None:
            (label_dir / f"{image_id}.txt").write_text(label_text)
    classes_file = tmp_path / "classes.txt"
    classes_file.write_text(classes)
    return images, label_dir, classes_file


class TestLoadDataset:
    def test_empty_dirs(self, tmp_path):
        images, labels, classes = _make_tree(tmp_path, {})
        ds = load_dataset(images, labels, classes)
        assert len(ds) == 0

    def test_minimal_dataset(self, tmp_path):
        images, labels, classes = _make_tree(
            tmp_path, {"scene_1": "0 0.5 0.5 0.2 0.2\n"}
        )
        ds = load_dataset(images, labels, classes)
        assert len(ds) == 1
        rec = ds.records[0]
        assert rec.image_id == "scene_1"
        assert rec.width == 8 and rec.height == 6
        assert len(rec.annotations) == 1
        assert rec.group_key == "scene"

    def test_missing_label_file_means_no_objects(self, tmp_path):
        images, labels, classes = _make_tree(tmp_path, {"img_1": None})
        ds = load_dataset(images, labels, classes)
        assert ds.records[0].annotations == ()

    def test_blank_lines_ignored(self, tmp_path):
        images, labels, classes = _make_tree(
            tmp_path, {"img_1": "\n0 0.5 0.5 0.2 0.2\n\n"}
        )
        ds = load_dataset(images, labels, classes)
        assert len(ds.records[0].annotations) == 1

    def test_deterministic_and_sorted(self, tmp_path):
        images, labels, classes = _make_tree(
            tmp_path,
            {"b_2": "1 0.5 0.5 0.1 0.1\n", "a_1": "0 0.4 0.4 0.1 0.1\n", "c_9": None},
        )
        first = load_dataset(images, labels, classes)
        second = load_dataset(images, labels, classes)
        assert first == second
        assert [r.image_id for r in first.records] == ["a_1", "b_2", "c_9"]

    def test_malformed_line_reports_file_and_line(self, tmp_path):
        images, labels, classes = _make_tree(
            tmp_path, {"img_1": "0 0.5 0.5 0.2 0.2\n9 0.5 0.5 0.2 0.2\n"}
        )
        with pytest.raises(DatasetLoadError, match=r"img_1\.txt:2"):
            load_dataset(images, labels, classes)

    def test_duplicate_stems_rejected(self, tmp_path):
        images, labels, classes = _make_tree(tmp_path, {"dup": None})
        arr = np.zeros((4, 4), dtype=np.uint8)
        Image.fromarray(arr).save(images / "dup.jpg", format="JPEG")
        with pytest.raises(DatasetLoadError, match="duplicate image id"):
            load_dataset(images, labels, classes)

    def test_missing_images_dir(self, tmp_path):
        classes = tmp_path / "classes.txt"
        classes.write_text("a\n")
        with pytest.raises(DatasetLoadError, match="not a directory"):
            load_dataset(tmp_path / "nope", tmp_path, classes)

    def test_corrupt_image_named_in_error(self, tmp_path):
        images, labels, classes = _make_tree(tmp_path, {})
        (images / "broken.png").write_bytes(b"not a png")
        with pytest.raises(DatasetLoadError, match="broken.png"):
            load_dataset(images, labels, classes)


class TestClassTaxonomy:
    def test_from_file(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("car\nrickshaw\nperson\n")
        tax = ClassTaxonomy.from_file(path)
        assert tax.names == ("car", "rickshaw", "person")
        assert len(tax) == 3

    def test_duplicate_names_rejected(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("car\ncar\n")
        with pytest.raises(DatasetLoadError, match="unique"):
            ClassTaxonomy.from_file(path)

    def test_internal_blank_line_rejected(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("car\n\nperson\n")
        with pytest.raises(DatasetLoadError, match="empty class name"):
            ClassTaxonomy.from_file(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("\n")
        with pytest.raises(DatasetLoadError, match="empty"):
            ClassTaxonomy.from_file(path)
