"""Label assignment: optimal one-to-one bipartite matching with a
deterministic tie-break, a brute-force oracle, and one-to-many assigners.

The matching cost follows the set-prediction convention: a weighted sum of
negative class probability, L1 box distance on normalized coordinates, and
negative generalized IoU on the unit square. Default weights are
(class, L1, GIoU) = (1, 5, 2).

hungarian() is exact: float entries are scaled to integers (every float is
a dyadic rational), solved with an O(n^3) shortest-augmenting-path method,
and the returned pairing is the lexicographically smallest pair list among
all minimum-cost assignments. Ties are resolved on the subgraph of edges
with zero reduced cost under the optimal dual potentials, where every
perfect matching is optimal. brute_force_assign() enumerates all injections
with the same tie-break and serves as the independent oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .annotations import Annotation, NormBox, to_pixel_box
from .geometry import giou, iou, l1_box_distance

# One-to-many label values: a non-negative label is the assigned target index.
NEGATIVE = -1
IGNORE = -2

BRUTE_FORCE_MAX_DIM = 8


@dataclass(frozen=True)
class CostWeights:
    """Non-negative weights of the matching-cost terms; not all zero."""

    w_cls: float = 1.0
    w_l1: float = 5.0
    w_giou: float = 2.0

    def __post_init__(self):
        for name in ("w_cls", "w_l1", "w_giou"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if self.w_cls == 0.0 and self.w_l1 == 0.0 and self.w_giou == 0.0:
            raise ValueError("cost weights must not all be zero")


@dataclass(frozen=True)
class CandidatePrediction:
    """A candidate box with a full class-probability vector (sums to 1)."""

    class_probs: tuple[float, ...]
    box: NormBox

    def __post_init__(self):
        object.__setattr__(self, "class_probs", tuple(float(p) for p in self.class_probs))
        if not self.class_probs:
            raise ValueError("class_probs must be non-empty")
        if any(not (math.isfinite(p) and p >= 0.0) for p in self.class_probs):
            raise ValueError("class probabilities must be finite and >= 0")
        total = math.fsum(self.class_probs)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"class probabilities sum to {total}, expected 1")


@dataclass(frozen=True)
class AssignmentResult:
    """One-to-one matching: pairs sorted by prediction index, the leftover
    index sets, and the total cost of the matched pairs."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_predictions: tuple[int, ...]
    unmatched_targets: tuple[int, ...]
    total_cost: float


@dataclass(frozen=True)
class OneToManyLabels:
    """Per-candidate supervision label: a target index, NEGATIVE, or IGNORE."""

    labels: tuple[int, ...]

    def positives(self) -> list[tuple[int, int]]:
        return [(i, t) for i, t in enumerate(self.labels) if t >= 0]


def _unit_square_boxes(boxes):
    return [to_pixel_box(b, 1.0, 1.0) for b in boxes]


def match_cost_matrix(
    preds: list[CandidatePrediction],
    targets: list[Annotation],
    weights: CostWeights | None = None,
) -> np.ndarray:
    """Pairwise matching costs, shape (len(preds), len(targets)).

    cost[i][j] = -w_cls * p_i(class_j) + w_l1 * L1(box_i, box_j)
                 - w_giou * GIoU(box_i, box_j)
    with GIoU computed on the unit square.
    """
    w = weights if weights is not None else CostWeights()
    if preds:
        k = len(preds[0].class_probs)
        if any(len(p.class_probs) != k for p in preds):
            raise ValueError("prediction probability vectors differ in length")
        for t in targets:
            if t.class_id >= k:
                raise ValueError(
                    f"target class id {t.class_id} outside probability vector of "
                    f"length {k}"
                )
    cost = np.zeros((len(preds), len(targets)), dtype=np.float64)
    pred_boxes = _unit_square_boxes([p.box for p in preds])
    target_boxes = _unit_square_boxes([t.box for t in targets])
    for i, pred in enumerate(preds):
        for j, target in enumerate(targets):
            cost[i, j] = (
                w.w_cls * -pred.class_probs[target.class_id]
                + w.w_l1 * l1_box_distance(pred.box, target.box)
                + w.w_giou * -giou(pred_boxes[i], target_boxes[j])
            )
    return cost


def _as_float_rows(cost) -> tuple[list[list[float]], int, int]:
    arr = np.asarray(cost, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ValueError(f"cost matrix must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError("cost matrix entries must be finite")
    return [list(map(float, row)) for row in arr], arr.shape[0], arr.shape[1]


def _scaled_int_rows(rows: list[list[float]]) -> list[list[int]]:
    """Exact integer representation: every float is n/2^k, so scaling by the
    largest denominator keeps all entries integral."""
    ratios = [[f.as_integer_ratio() for f in row] for row in rows]
    denom = 1
    for row in ratios:
        for _, d in row:
            denom = max(denom, d)
    return [[n * (denom // d) for n, d in row] for row in ratios]


def _solve_square(a: list[list[int]], size: int):
    """Shortest-augmenting-path assignment on a square integer matrix.

    Returns (row_of_col, u, v): the matched row per column and the dual
    potentials (1-indexed with a virtual column 0). Exact integer arithmetic
    throughout; raises if the final duals fail complementary slackness.
    """
    inf = math.inf
    u = [0] * (size + 1)
    v = [0] * (size + 1)
    p = [0] * (size + 1)
    way = [0] * (size + 1)
    for i in range(1, size + 1):
        p[0] = i
        j0 = 0
        minv: list = [inf] * (size + 1)
        used = [False] * (size + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            delta = inf
            j1 = 0
            for j in range(1, size + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(size + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    for i in range(1, size + 1):
        ui = u[i]
        row = a[i - 1]
        for j in range(1, size + 1):
            reduced = row[j - 1] - ui - v[j]
            if reduced < 0 or (p[j] == i and reduced != 0):
                raise RuntimeError("assignment solver produced invalid duals")
    return p, u, v


def _perfect_matching_exists(adjacency: list[tuple[int, ...]], size: int) -> bool:
    """Kuhn's algorithm: can every row be matched to a distinct column?"""
    match_of_col = [-1] * size

    def try_row(r: int, seen: list[bool]) -> bool:
        for c in adjacency[r]:
            if seen[c]:
                continue
            seen[c] = True
            if match_of_col[c] < 0 or try_row(match_of_col[c], seen):
                match_of_col[c] = r
                return True
        return False

    for r in range(size):
        if not try_row(r, [False] * size):
            return False
    return True


def _lex_smallest_pairs(
    tight: list[tuple[int, ...]], rows: int, cols: int, size: int
) -> list[tuple[int, int]]:
    """Lexicographically smallest real pair list among the perfect matchings
    of the tight graph (all of which are cost-optimal).

    Real cells are (r < rows, c < cols); padded rows/columns only absorb the
    rectangular slack. Rows skipped between chosen pairs may only be matched
    to padded columns, which pins the sorted real pair list to the chosen
    prefix.
    """
    m = min(rows, cols)
    pairs: list[tuple[int, int]] = []
    fixed: dict[int, int] = {}
    restricted: set[int] = set()
    used_cols: set[int] = set()
    prev = -1

    def feasible(trial_fixed: dict[int, int], trial_restricted: set[int]) -> bool:
        adjacency = []
        for r in range(size):
            if r in trial_fixed:
                adjacency.append((trial_fixed[r],))
            elif r in trial_restricted:
                adjacency.append(tuple(c for c in tight[r] if c >= cols))
            else:
                adjacency.append(tight[r])
        return _perfect_matching_exists(adjacency, size)

    for k in range(m):
        chosen = None
        for r in range(prev + 1, rows - (m - k) + 1):
            skipped = restricted | set(range(prev + 1, r))
            for c in tight[r]:
                if c >= cols or c in used_cols:
                    continue
                if feasible({**fixed, r: c}, skipped):
                    chosen = (r, c)
                    break
            if chosen:
                break
        if chosen is None:
            raise RuntimeError("tight-graph refinement found no optimal pairing")
        r, c = chosen
        restricted |= set(range(prev + 1, r))
        fixed[r] = c
        used_cols.add(c)
        pairs.append((r, c))
        prev = r
    return pairs


def hungarian(cost) -> AssignmentResult:
    """Minimum-cost one-to-one assignment of min(rows, cols) pairs.

    Entries must be finite (negative allowed). Among all minimum-cost
    assignments the lexicographically smallest pair list is returned; the
    result is exact, independent of entry scale and platform.
    """
    rows, n_rows, n_cols = _as_float_rows(cost)
    if n_rows == 0 or n_cols == 0:
        return AssignmentResult(
            pairs=(),
            unmatched_predictions=tuple(range(n_rows)),
            unmatched_targets=tuple(range(n_cols)),
            total_cost=0.0,
        )
    ints = _scaled_int_rows(rows)
    size = max(n_rows, n_cols)
    sentinel = 1 + sum(abs(x) for row in ints for x in row)
    padded = [
        [ints[r][c] if r < n_rows and c < n_cols else sentinel for c in range(size)]
        for r in range(size)
    ]
    _, u, v = _solve_square(padded, size)
    tight = [
        tuple(c for c in range(size) if padded[r][c] - u[r + 1] - v[c + 1] == 0)
        for r in range(size)
    ]
    pairs = _lex_smallest_pairs(tight, n_rows, n_cols, size)
    matched_rows = {r for r, _ in pairs}
    matched_cols = {c for _, c in pairs}
    return AssignmentResult(
        pairs=tuple(pairs),
        unmatched_predictions=tuple(r for r in range(n_rows) if r not in matched_rows),
        unmatched_targets=tuple(c for c in range(n_cols) if c not in matched_cols),
        total_cost=math.fsum(rows[r][c] for r, c in pairs),
    )


def brute_force_assign(cost, max_dim: int = BRUTE_FORCE_MAX_DIM) -> AssignmentResult:
    """Exhaustive assignment oracle with the same tie-break as hungarian.

    Enumerates every injection of the smaller side into the larger; refuses
    matrices whose smaller dimension exceeds max_dim. Candidate totals are
    compared in exact arithmetic (entries scaled to integers by a common
    power of two), so ties and orderings never fall victim to float
    absorption.
    """
    rows, n_rows, n_cols = _as_float_rows(cost)
    m = min(n_rows, n_cols)
    if m > max_dim:
        raise ValueError(f"min dimension {m} exceeds oracle bound {max_dim}")
    if m == 0:
        return AssignmentResult(
            pairs=(),
            unmatched_predictions=tuple(range(n_rows)),
            unmatched_targets=tuple(range(n_cols)),
            total_cost=0.0,
        )
    denom = 1
    ratios = [[f.as_integer_ratio() for f in row] for row in rows]
    for row in ratios:
        for _, d in row:
            denom = max(denom, d)
    ints = [[n * (denom // d) for n, d in row] for row in ratios]
    best_sum: int | None = None
    best_pairs: tuple[tuple[int, int], ...] | None = None
    if n_rows <= n_cols:
        for perm in itertools.permutations(range(n_cols), n_rows):
            total = 0
            for r, c in enumerate(perm):
                total += ints[r][c]
            if best_sum is not None and total > best_sum:
                continue
            pairs = tuple(enumerate(perm))
            if best_sum is None or total < best_sum or pairs < best_pairs:
                best_sum = total
                best_pairs = pairs
    else:
        for perm in itertools.permutations(range(n_rows), n_cols):
            total = 0
            for c, r in enumerate(perm):
                total += ints[r][c]
            if best_sum is not None and total > best_sum:
                continue
            pairs = tuple(sorted((r, c) for c, r in enumerate(perm)))
            if best_sum is None or total < best_sum or pairs < best_pairs:
                best_sum = total
                best_pairs = pairs
    matched_rows = {r for r, _ in best_pairs}
    matched_cols = {c for _, c in best_pairs}
    return AssignmentResult(
        pairs=best_pairs,
        unmatched_predictions=tuple(r for r in range(n_rows) if r not in matched_rows),
        unmatched_targets=tuple(c for c in range(n_cols) if c not in matched_cols),
        total_cost=math.fsum(rows[r][c] for r, c in best_pairs),
    )


def _iou_table(candidates: list[NormBox], targets: list[Annotation]) -> np.ndarray:
    cand_boxes = _unit_square_boxes(candidates)
    target_boxes = _unit_square_boxes([t.box for t in targets])
    table = np.zeros((len(candidates), len(targets)), dtype=np.float64)
    for i, cb in enumerate(cand_boxes):
        for j, tb in enumerate(target_boxes):
            table[i, j] = iou(cb, tb)
    return table


def max_iou_assign(
    candidates: list[NormBox],
    targets: list[Annotation],
    pos_thr: float = 0.5,
    neg_thr: float = 0.4,
    force_match: bool = True,
) -> OneToManyLabels:
    """Threshold-based one-to-many assignment.

    A candidate is positive for its best-IoU target when that IoU reaches
    pos_thr, negative below neg_thr, ignored in between. With force_match,
    each target's best candidate is upgraded to positive for it when the
    candidate would otherwise be negative or ignored; a candidate forced by
    several targets keeps the highest-IoU one. Argmax ties go to the lowest
    index on either side.
    """
    if not (0.0 <= neg_thr <= pos_thr <= 1.0):
        raise ValueError(
            f"thresholds must satisfy 0 <= neg <= pos <= 1, got neg={neg_thr} pos={pos_thr}"
        )
    if not candidates:
        return OneToManyLabels(())
    if not targets:
        return OneToManyLabels((NEGATIVE,) * len(candidates))
    table = _iou_table(candidates, targets)
    labels = []
    for i in range(len(candidates)):
        best_j = int(np.argmax(table[i]))
        best = table[i, best_j]
        if best >= pos_thr:
            labels.append(best_j)
        elif best < neg_thr:
            labels.append(NEGATIVE)
        else:
            labels.append(IGNORE)
    if force_match:
        forced: dict[int, tuple[float, int]] = {}
        for j in range(len(targets)):
            best_i = int(np.argmax(table[:, j]))
            entry = (table[best_i, j], j)
            if best_i not in forced or (
                entry[0] > forced[best_i][0]
                or (entry[0] == forced[best_i][0] and entry[1] < forced[best_i][1])
            ):
                forced[best_i] = entry
        for i, (_, j) in forced.items():
            if labels[i] < 0:
                labels[i] = j
    return OneToManyLabels(tuple(labels))


def topk_iou_assign(
    candidates: list[NormBox], targets: list[Annotation], k: int
) -> OneToManyLabels:
    """Per-target top-k one-to-many assignment.

    Each target claims its k highest-IoU candidates with IoU > 0; a
    candidate claimed by several targets keeps the highest-IoU one (tie to
    the lowest target index). Unclaimed candidates are negative.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not candidates:
        return OneToManyLabels(())
    claims: dict[int, tuple[float, int]] = {}
    if targets:
        table = _iou_table(candidates, targets)
        for j in range(len(targets)):
            order = sorted(range(len(candidates)), key=lambda i: (-table[i, j], i))
            for i in order[:k]:
                score = table[i, j]
                if score <= 0.0:
                    break
                if i not in claims or (
                    score > claims[i][0] or (score == claims[i][0] and j < claims[i][1])
                ):
                    claims[i] = (score, j)
    labels = tuple(
        claims[i][1] if i in claims else NEGATIVE for i in range(len(candidates))
    )
    return OneToManyLabels(labels)
