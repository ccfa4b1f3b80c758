import random

import pytest

from detkit import NormBox, PixelBox, giou, iou, l1_box_distance


def random_pixel_box(rng):
    x1 = rng.uniform(0, 50)
    y1 = rng.uniform(0, 50)
    return PixelBox(x1, y1, x1 + rng.uniform(0.5, 40), y1 + rng.uniform(0.5, 40))


class TestIou:
    def test_identical_boxes(self):
        b = PixelBox(1, 2, 5, 9)
        assert iou(b, b) == 1.0

    def test_disjoint_boxes(self):
        assert iou(PixelBox(0, 0, 1, 1), PixelBox(5, 5, 6, 6)) == 0.0

    def test_partial_overlap(self):
        # intersection 1, union 7
        assert iou(PixelBox(0, 0, 2, 2), PixelBox(1, 1, 3, 3)) == pytest.approx(1 / 7)

    def test_symmetric_and_bounded(self):
        rng = random.Random(11)
        for _ in range(200):
            a, b = random_pixel_box(rng), random_pixel_box(rng)
            v = iou(a, b)
            assert v == iou(b, a)
            assert 0.0 <= v <= 1.0

    def test_one_only_for_identical(self):
        a = PixelBox(0, 0, 2, 2)
        b = PixelBox(0, 0, 2, 2.0000001)
        assert iou(a, b) < 1.0


class TestGiou:
    def test_identical_boxes(self):
        b = PixelBox(0, 0, 3, 4)
        assert giou(b, b) == 1.0

    def test_far_apart(self):
        # enclosing area 9, union 2, IoU 0
        assert giou(PixelBox(0, 0, 1, 1), PixelBox(2, 2, 3, 3)) == pytest.approx(-7 / 9)

    def test_touching_boxes(self):
        assert giou(PixelBox(0, 0, 1, 1), PixelBox(1, 0, 2, 1)) == 0.0

    def test_never_exceeds_iou(self):
        rng = random.Random(13)
        for _ in range(200):
            a, b = random_pixel_box(rng), random_pixel_box(rng)
            assert giou(a, b) <= iou(a, b) + 1e-12
            assert -1.0 < giou(a, b) <= 1.0


class TestScaleConsistency:
    def test_uniform_scaling_leaves_metrics_unchanged(self):
        rng = random.Random(17)
        for scale in (2.0, 0.5, 3.7, 128.0):
            for _ in range(50):
                a, b = random_pixel_box(rng), random_pixel_box(rng)
                sa = PixelBox(a.x1 * scale, a.y1 * scale, a.x2 * scale, a.y2 * scale)
                sb = PixelBox(b.x1 * scale, b.y1 * scale, b.x2 * scale, b.y2 * scale)
                assert iou(sa, sb) == pytest.approx(iou(a, b), abs=1e-9)
                assert giou(sa, sb) == pytest.approx(giou(a, b), abs=1e-9)


class TestL1Distance:
    def test_zero_for_equal(self):
        b = NormBox(0.5, 0.5, 0.2, 0.2)
        assert l1_box_distance(b, b) == 0.0

    def test_componentwise_sum(self):
        a = NormBox(0.4, 0.4, 0.3, 0.3)
        b = NormBox(0.5, 0.5, 0.4, 0.4)
        assert l1_box_distance(a, b) == pytest.approx(0.4)

    def test_symmetric(self):
        rng = random.Random(19)
        for _ in range(100):
            w1, w2 = rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5)
            a = NormBox(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), w1, w1)
            b = NormBox(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), w2, w2)
            assert l1_box_distance(a, b) == l1_box_distance(b, a)
