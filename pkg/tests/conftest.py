import random

import numpy as np
import pytest

from detkit import Annotation, ClassTaxonomy, Dataset, Detection, ImageRecord, NormBox


def random_norm_box(rng: random.Random, min_size: float = 1e-6) -> NormBox:
    w = rng.uniform(min_size, 1.0)
    h = rng.uniform(min_size, 1.0)
    cx = rng.uniform(w / 2, 1.0 - w / 2)
    cy = rng.uniform(h / 2, 1.0 - h / 2)
    return NormBox(cx, cy, w, h)


def random_annotation(rng: random.Random, class_count: int = 13) -> Annotation:
    return Annotation(rng.randrange(class_count), random_norm_box(rng))


def random_raster_array(rng: np.random.Generator, width: int, height: int):
    return rng.integers(0, 256, size=(height, width), dtype=np.uint8)


def jitter_box(rng: random.Random, box: NormBox, scale: float) -> NormBox:
    w = min(1.0, max(0.01, box.w * (1 + rng.uniform(-scale, scale))))
    h = min(1.0, max(0.01, box.h * (1 + rng.uniform(-scale, scale))))
    cx = min(1.0 - w / 2, max(w / 2, box.cx + rng.uniform(-scale, scale) * box.w))
    cy = min(1.0 - h / 2, max(h / 2, box.cy + rng.uniform(-scale, scale) * box.h))
    return NormBox(cx, cy, w, h)


def random_micro_dataset(seed: int):
    """A small dataset plus detections: <= 4 images, <= 3 classes,
    <= 10 detections overall."""
    rng = random.Random(seed)
    class_count = rng.randint(1, 3)
    taxonomy = ClassTaxonomy(tuple(f"class{i}" for i in range(class_count)))
    n_images = rng.randint(1, 4)
    records = []
    predictions = {}
    detection_budget = 10
    for i in range(n_images):
        image_id = f"img_{i:02d}"
        annotations = tuple(
            random_annotation(rng, class_count) for _ in range(rng.randint(0, 3))
        )
        records.append(ImageRecord(image_id, 64, 64, annotations, image_id))
        dets = []
        for _ in range(rng.randint(0, 3)):
            if detection_budget == 0:
                break
            detection_budget -= 1
            if annotations and rng.random() < 0.7:
                base = rng.choice(annotations)
                box = jitter_box(rng, base.box, rng.uniform(0.0, 0.4))
                class_id = base.class_id if rng.random() < 0.8 else rng.randrange(class_count)
            else:
                box = random_norm_box(rng, min_size=0.05)
                class_id = rng.randrange(class_count)
            dets.append(Detection(class_id, rng.random(), box))
        predictions[image_id] = dets
    return Dataset(taxonomy, tuple(records)), predictions


@pytest.fixture
def micro_dataset():
    return random_micro_dataset(2024)
