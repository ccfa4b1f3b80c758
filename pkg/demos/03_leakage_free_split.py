"""Walkthrough: scene-grouped train/validation splitting.

Consecutive frames from one recording are near-duplicates; an image-level
random split would leak them across train and validation. The split here
works on scene groups (image id minus its trailing frame number) and is
driven by a keyed-hash permutation, so seed 43 produces the same split on
every machine.
"""

from collections import Counter

from detkit import SplitConfig, scene_group_key, split_ids


def main():
    # 5 recordings with different lengths, 58 frames total
    scenes = {
        "dhaka_day1": 18,
        "dhaka_night2": 14,
        "sylhet_hw3": 10,
        "khulna_rd1": 9,
        "sherpur_x9": 7,
    }
    ids = [f"{scene}_{i:04d}" for scene, n in scenes.items() for i in range(n)]
    print(f"{len(ids)} frames across {len(scenes)} scenes")
    print("example grouping:", ids[0], "->", scene_group_key(ids[0]))

    cfg = SplitConfig(val_fraction=0.2, seed=43)
    result = split_ids(((i, scene_group_key(i)) for i in ids), cfg)

    val_scenes = Counter(scene_group_key(i) for i in result.val_ids)
    train_scenes = Counter(scene_group_key(i) for i in result.train_ids)
    print(f"\nvalidation: {len(result.val_ids)} frames "
          f"(target {0.2 * len(ids):.0f}, off by at most one scene)")
    for scene, count in sorted(val_scenes.items()):
        print(f"  {scene}: {count} frames")
    print(f"train: {len(result.train_ids)} frames in {len(train_scenes)} scenes")

    assert not (set(val_scenes) & set(train_scenes)), "scene leaked across splits"
    print("\nno scene appears on both sides; rerunning with the same seed")
    again = split_ids(((i, scene_group_key(i)) for i in ids), cfg)
    print("identical split on rerun:", again == result)

    other = split_ids(((i, scene_group_key(i)) for i in ids),
                      SplitConfig(val_fraction=0.2, seed=44))
    print("different seed, different validation scenes:",
          sorted({scene_group_key(i) for i in other.val_ids}))


if __name__ == "__main__":
    main()
