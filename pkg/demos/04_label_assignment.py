"""Walkthrough: one-to-one and one-to-many label assignment.

Set-prediction training supervises each ground-truth object through exactly
one prediction, found by minimum-cost bipartite matching over a class/L1/GIoU
cost. Auxiliary heads can instead be supervised one-to-many, where several
candidates go positive for the same object. Both schemes are shown on one
hand-built scene.
"""

import numpy as np

from detkit import (
    Annotation,
    CandidatePrediction,
    CostWeights,
    NormBox,
    brute_force_assign,
    hungarian,
    match_cost_matrix,
    max_iou_assign,
    topk_iou_assign,
)


def probs(best, total=4, confidence=0.9):
    p = [(1 - confidence) / (total - 1)] * total
    p[best] = confidence
    return tuple(p)


def main():
    targets = [
        Annotation(0, NormBox(0.30, 0.40, 0.20, 0.25)),  # car
        Annotation(2, NormBox(0.70, 0.60, 0.25, 0.30)),  # person
    ]
    candidates = [
        CandidatePrediction(probs(0), NormBox(0.31, 0.41, 0.21, 0.24)),  # near car
        CandidatePrediction(probs(2), NormBox(0.69, 0.61, 0.24, 0.31)),  # near person
        CandidatePrediction(probs(1), NormBox(0.50, 0.50, 0.30, 0.30)),  # in between
        CandidatePrediction(probs(0, confidence=0.4), NormBox(0.28, 0.42, 0.18, 0.22)),
    ]

    cost = match_cost_matrix(candidates, targets, CostWeights(1.0, 5.0, 2.0))
    print("cost matrix (rows = predictions, cols = targets):")
    print(np.array_str(cost, precision=3))

    result = hungarian(cost)
    print("\noptimal one-to-one assignment:")
    for pred_i, target_j in result.pairs:
        print(f"  prediction {pred_i} -> target {target_j} "
              f"(cost {cost[pred_i, target_j]:+.3f})")
    print("  unmatched predictions:", result.unmatched_predictions)
    print("  total cost:", f"{result.total_cost:+.3f}")

    oracle = brute_force_assign(cost)
    print("brute-force oracle agrees:", oracle.pairs == result.pairs)

    boxes = [c.box for c in candidates]
    print("\nmax-IoU one-to-many labels (pos 0.5 / neg 0.4, force match on):")
    labels = max_iou_assign(boxes, targets)
    for i, label in enumerate(labels.labels):
        meaning = {-1: "negative", -2: "ignore"}.get(label, f"positive -> target {label}")
        print(f"  candidate {i}: {meaning}")

    print("\ntop-2 per target one-to-many labels:")
    topk = topk_iou_assign(boxes, targets, k=2)
    for i, label in enumerate(topk.labels):
        meaning = "negative" if label < 0 else f"positive -> target {label}"
        print(f"  candidate {i}: {meaning}")
    print("\nseveral candidates can share one target here, unlike the")
    print("injective one-to-one matching above.")


if __name__ == "__main__":
    main()
