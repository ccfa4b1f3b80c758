"""Dataset statistics and deterministic, leakage-free train/validation splits.

Frames extracted from one recording share a scene group key; splitting by
group keeps near-duplicate frames out of opposite splits. The split order is
a keyed-hash permutation (SHA-256 over seed and group key), so the same seed
yields the same split on every platform and run.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .annotations import Dataset

_FRAME_SUFFIX = re.compile(r"^(.+)_\d+$")


@dataclass(frozen=True)
class SplitConfig:
    val_fraction: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")


@dataclass(frozen=True)
class SplitResult:
    train_ids: frozenset[str]
    val_ids: frozenset[str]


@dataclass(frozen=True)
class StatsReport:
    """Exact object and image counts; class_counts is indexed by class id."""

    class_counts: tuple[int, ...]
    total_objects: int
    total_images: int
    group_image_counts: dict[str, int]


def scene_group_key(image_id: str) -> str:
    """Scene key of an image id: the id with its final ``_<digits>`` frame
    token removed; ids without such a suffix group alone."""
    if not image_id:
        raise ValueError("image id must be non-empty")
    m = _FRAME_SUFFIX.match(image_id)
    return m.group(1) if m else image_id


def _shuffle_key(seed: int, group: str) -> tuple[str, str]:
    digest = hashlib.sha256(f"{seed}:{group}".encode("utf-8")).hexdigest()
    return digest, group


def split_ids(
    id_groups: Iterable[tuple[str, str]], cfg: SplitConfig
) -> SplitResult:
    """Group-level split of (image_id, group_key) pairs.

    Groups are ordered by the seeded hash permutation and assigned to the
    validation set until its image count first reaches val_fraction of the
    total; the fraction is interpreted at decimal precision so e.g. 0.2 of
    100 images stops at exactly 20. Requires at least two groups.
    """
    groups: dict[str, list[str]] = {}
    total = 0
    for image_id, group in id_groups:
        groups.setdefault(group, []).append(image_id)
        total += 1
    if len(groups) < 2:
        raise ValueError(
            f"need at least 2 scene groups to split without leakage, got {len(groups)}"
        )
    target = Fraction(str(cfg.val_fraction)) * total
    val: set[str] = set()
    count = 0
    for group in sorted(groups, key=lambda g: _shuffle_key(cfg.seed, g)):
        val.update(groups[group])
        count += len(groups[group])
        if count >= target:
            break
    train = {image_id for ids in groups.values() for image_id in ids} - val
    return SplitResult(train_ids=frozenset(train), val_ids=frozenset(val))


def grouped_split(d: Dataset, cfg: SplitConfig) -> SplitResult:
    """Leakage-free split of a dataset along its record group keys."""
    if not d.records:
        raise ValueError("cannot split an empty dataset")
    return split_ids(((rec.image_id, rec.group_key) for rec in d.records), cfg)


def class_distribution(d: Dataset) -> StatsReport:
    """Per-class object counts plus image and group totals."""
    counts = [0] * len(d.taxonomy)
    group_counts: Counter[str] = Counter()
    total = 0
    for rec in d.records:
        group_counts[rec.group_key] += 1
        for ann in rec.annotations:
            counts[ann.class_id] += 1
            total += 1
    return StatsReport(
        class_counts=tuple(counts),
        total_objects=total,
        total_images=len(d.records),
        group_image_counts=dict(group_counts),
    )
