"""Independent reference implementations used as test oracles.

Everything here is written as a direct, scalar transcription of the
documented contracts, deliberately sharing no code with the package:
pure-Python loops, separate IoU and rounding logic.
"""

from fractions import Fraction


def _round_ratio_half_even(num: int, den: int) -> int:
    """Nearest integer to num/den (den > 0), ties to even."""
    q, rem = divmod(num, den)
    double = 2 * rem
    if double > den or (double == den and q % 2 != 0):
        return q + 1
    return q


def ref_equalize_lut(hist, n):
    """Scalar equalization lookup table for a 256-bin histogram."""
    cdf_min = None
    cdf = 0
    cdfs = []
    for count in hist:
        cdf += count
        cdfs.append(cdf)
        if cdf_min is None and count > 0:
            cdf_min = cdf
    if cdf_min is None or cdf_min == n:
        return list(range(256))
    lut = []
    for value in range(256):
        mapped = _round_ratio_half_even(255 * (cdfs[value] - cdf_min), n - cdf_min)
        lut.append(min(255, max(0, mapped)))
    return lut


def ref_clip_histogram(hist, clip_limit, n):
    limit = max(1, int(clip_limit * n / 256.0))
    clipped = [min(count, limit) for count in hist]
    excess = n - sum(clipped)
    share, remainder = divmod(excess, 256)
    clipped = [count + share for count in clipped]
    for i in range(remainder):
        clipped[i] += 1
    return clipped


def ref_clahe(pixels, width, height, tiles_x, tiles_y, clip_limit):
    """Scalar CLAHE over a row-major list of lists; clip_limit None disables
    clipping. Mirrors the documented algorithm, not the vectorized code."""

    def spans(size, tiles):
        base = size // tiles
        out = []
        for i in range(tiles):
            lo = i * base
            hi = (i + 1) * base if i < tiles - 1 else size
            out.append((lo, hi))
        return out

    x_spans = spans(width, tiles_x)
    y_spans = spans(height, tiles_y)

    luts = []
    for y0, y1 in y_spans:
        row_luts = []
        for x0, x1 in x_spans:
            hist = [0] * 256
            for y in range(y0, y1):
                for x in range(x0, x1):
                    hist[pixels[y][x]] += 1
            n = (y1 - y0) * (x1 - x0)
            if max(hist) == n:
                row_luts.append(list(range(256)))
                continue
            if clip_limit is not None:
                hist = ref_clip_histogram(hist, clip_limit, n)
            row_luts.append(ref_equalize_lut(hist, n))
        luts.append(row_luts)

    centers_x = [(x0 + x1 - 1) / 2.0 for x0, x1 in x_spans]
    centers_y = [(y0 + y1 - 1) / 2.0 for y0, y1 in y_spans]

    def neighbors(centers, pos):
        left = -1
        for i, center in enumerate(centers):
            if center <= pos:
                left = i
        right = left + 1
        if left < 0 or right > len(centers) - 1:
            left_c = min(max(left, 0), len(centers) - 1)
            return left_c, left_c, 0.0
        frac = (pos - centers[left]) / (centers[right] - centers[left])
        return left, right, frac

    out = [[0] * width for _ in range(height)]
    for y in range(height):
        ty0, ty1, fy = neighbors(centers_y, float(y))
        for x in range(width):
            tx0, tx1, fx = neighbors(centers_x, float(x))
            v = pixels[y][x]
            tl = luts[ty0][tx0][v]
            tr = luts[ty0][tx1][v]
            bl = luts[ty1][tx0][v]
            br = luts[ty1][tx1][v]
            top = tl + fx * (tr - tl)
            bottom = bl + fx * (br - bl)
            blended = top + fy * (bottom - top)
            out[y][x] = min(255, max(0, round(blended)))
    return out


# ---------------------------------------------------------------------------
# naive detection scorer


def _corners(box):
    x1 = max(0.0, min(1.0, box.cx - box.w / 2))
    x2 = max(0.0, min(1.0, box.cx + box.w / 2))
    y1 = max(0.0, min(1.0, box.cy - box.h / 2))
    y2 = max(0.0, min(1.0, box.cy + box.h / 2))
    return x1, y1, x2, y2


def ref_box_iou(a, b):
    ax1, ay1, ax2, ay2 = _corners(a)
    bx1, by1, bx2, by2 = _corners(b)
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


def ref_average_precision(flags, num_gt):
    if num_gt == 0:
        return None if not flags else 0.0
    if not flags:
        return 0.0
    points = []
    tp = 0
    for k, flag in enumerate(flags, start=1):
        tp += 1 if flag else 0
        points.append((tp / num_gt, tp / k))
    total = 0.0
    for i in range(101):
        r = i / 100.0
        best = 0.0
        for recall, precision in points:
            if recall >= r and precision > best:
                best = precision
        total += best
    return total / 101


def ref_evaluate(predictions, dataset, conf_thr, iou_thrs):
    """Direct transcription of the scoring definitions.

    Returns (ap, map50, map50_95, gt_counts) with ap[class][thr].
    """
    num_classes = len(dataset.taxonomy.names)
    gt_counts = {c: 0 for c in range(num_classes)}
    for rec in dataset.records:
        for ann in rec.annotations:
            gt_counts[ann.class_id] += 1

    pooled = {c: {t: [] for t in iou_thrs} for c in range(num_classes)}
    for rec in dataset.records:
        dets = [
            d for d in predictions.get(rec.image_id, []) if d.confidence >= conf_thr
        ]
        dets.sort(
            key=lambda d: (
                -d.confidence, d.class_id, d.box.cx, d.box.cy, d.box.w, d.box.h,
            )
        )
        for c in range(num_classes):
            class_dets = [(i, d) for i, d in enumerate(dets) if d.class_id == c]
            class_gts = [a for a in rec.annotations if a.class_id == c]
            for t in iou_thrs:
                taken = [False] * len(class_gts)
                for i, det in class_dets:
                    best_j = -1
                    best = 0.0
                    for j, gt in enumerate(class_gts):
                        if taken[j]:
                            continue
                        overlap = ref_box_iou(det.box, gt.box)
                        if overlap > best:
                            best = overlap
                            best_j = j
                    hit = best_j >= 0 and best >= t
                    if hit:
                        taken[best_j] = True
                    pooled[c][t].append(((-det.confidence, rec.image_id, i), hit))

    ap = {}
    for c in range(num_classes):
        ap[c] = {}
        for t in iou_thrs:
            flags = [hit for _, hit in sorted(pooled[c][t])]
            ap[c][t] = ref_average_precision(flags, gt_counts[c])

    scored = [c for c in range(num_classes) if gt_counts[c] > 0]
    map50 = None
    if scored and 0.5 in iou_thrs:
        map50 = sum(ap[c][0.5] for c in scored) / len(scored)
    map50_95 = None
    if scored:
        map50_95 = sum(ap[c][t] for c in scored for t in iou_thrs) / (
            len(scored) * len(iou_thrs)
        )
    return ap, map50, map50_95, gt_counts


def ref_split_trace(id_groups, val_fraction_text, seed):
    """Greedy grouped-split trace from the documented hash ordering."""
    import hashlib

    groups = {}
    total = 0
    for image_id, group in id_groups:
        groups.setdefault(group, []).append(image_id)
        total += 1
    order = sorted(
        groups,
        key=lambda g: (hashlib.sha256(f"{seed}:{g}".encode("utf-8")).hexdigest(), g),
    )
    target = Fraction(val_fraction_text) * total
    val = set()
    count = 0
    for group in order:
        val.update(groups[group])
        count += len(groups[group])
        if count >= target:
            break
    train = {i for ids in groups.values() for i in ids} - val
    return train, val
