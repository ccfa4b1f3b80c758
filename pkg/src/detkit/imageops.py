"""8-bit raster enhancement: histogram equalization, CLAHE, gamma correction.

All operations are pure functions on decoded rasters and are exactly
reproducible: tone mappings are built in integer arithmetic and every
rounding step is round-half-to-even.

Conventions fixed here (the common reference formulations):

* Equalization maps value v to round(255 * (cdf(v) - cdf_min) / (N - cdf_min))
  where cdf is the cumulative histogram, cdf_min its smallest nonzero value
  and N the pixel count; a constant image maps to itself.
* CLAHE splits the image into a tiles_x x tiles_y grid (remainder pixels
  absorbed by the last row/column of tiles), equalizes each tile after an
  optional histogram clip, and blends the per-tile mappings bilinearly
  between tile centers with clamp-to-edge at the borders. The clip
  threshold is max(1, int(clip_limit * tile_pixels / 256)); the clipped
  excess is redistributed uniformly in a single pass, excess // 256 to
  every bin and one extra unit to bins 0..(excess % 256 - 1).
* Gamma correction maps value v to round(255 * (v / 255) ** gamma), so
  gamma < 1 brightens.
* Color images are enhanced on the luma plane only, through full-range
  BT.601 YCbCr, to avoid per-channel hue shifts.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable

import numpy as np


@dataclass
class Raster:
    """Decoded 8-bit image: samples shape (height, width) for 1 channel or
    (height, width, 3) interleaved for color."""

    width: int
    height: int
    channels: int
    samples: np.ndarray

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"empty raster {self.width}x{self.height}")
        self.samples = np.asarray(self.samples)
        if self.samples.dtype != np.uint8:
            raise ValueError(f"samples must be uint8, got {self.samples.dtype}")
        expected = (self.height, self.width) if self.channels == 1 else (
            self.height,
            self.width,
            3,
        )
        if self.samples.shape != expected:
            raise ValueError(
                f"samples shape {self.samples.shape} does not match {expected}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Raster":
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim == 2:
            return cls(arr.shape[1], arr.shape[0], 1, arr)
        if arr.ndim == 3 and arr.shape[2] == 3:
            return cls(arr.shape[1], arr.shape[0], 3, arr)
        raise ValueError(f"unsupported array shape {arr.shape}")


@dataclass(frozen=True)
class ClaheParams:
    """CLAHE grid and clip limit; clip_limit=None disables clipping.

    clip_limit is a multiple of the mean per-tile bin count (tile_pixels/256)
    and must be >= 1 when enabled.
    """

    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float | None = 2.0

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError(f"tile grid must be >= 1x1, got {self.tiles_x}x{self.tiles_y}")
        if self.clip_limit is not None and not (
            math.isfinite(self.clip_limit) and self.clip_limit >= 1.0
        ):
            raise ValueError(f"clip limit must be >= 1, got {self.clip_limit}")


@dataclass(frozen=True)
class GammaValue:
    """Power-law exponent for tone mapping; must be positive and finite."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")


def _require_channels(r: Raster, channels: int, op: str) -> None:
    if r.channels != channels:
        raise ValueError(f"{op} requires a {channels}-channel raster, got {r.channels}")


def histogram(r: Raster) -> np.ndarray:
    """256 bin counts of a single-channel raster."""
    _require_channels(r, 1, "histogram")
    return np.bincount(r.samples.ravel(), minlength=256).astype(np.int64)


def _div_round_half_even(num: np.ndarray, den: int) -> np.ndarray:
    """Exact nearest-integer division of int64 numerators, ties to even."""
    q = num // den
    rem = num - q * den
    two = 2 * rem
    up = (two > den) | ((two == den) & (q % 2 != 0))
    return q + up


def _equalize_lut(hist: np.ndarray) -> np.ndarray:
    """Equalization lookup table for a 256-bin histogram (identity when the
    histogram is concentrated in one bin)."""
    hist = np.asarray(hist, dtype=np.int64)
    n = int(hist.sum())
    occupied = np.nonzero(hist)[0]
    if occupied.size == 0:
        return np.arange(256, dtype=np.uint8)
    cdf = np.cumsum(hist)
    cdf_min = int(cdf[occupied[0]])
    if cdf_min == n:
        return np.arange(256, dtype=np.uint8)
    scaled = _div_round_half_even(255 * (cdf - cdf_min), n - cdf_min)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def equalize_hist(r: Raster) -> Raster:
    """Global histogram equalization of a single-channel raster."""
    _require_channels(r, 1, "equalize_hist")
    lut = _equalize_lut(histogram(r))
    return Raster(r.width, r.height, 1, lut[r.samples])


def gamma_correct(r: Raster, gamma: GammaValue | float) -> Raster:
    """Power-law tone mapping applied per channel."""
    g = gamma.gamma if isinstance(gamma, GammaValue) else GammaValue(float(gamma)).gamma
    lut = np.rint(255.0 * (np.arange(256) / 255.0) ** g).astype(np.uint8)
    return Raster(r.width, r.height, r.channels, lut[r.samples])


def clip_histogram(hist: np.ndarray, clip_limit: float) -> np.ndarray:
    """Clip bins at clip_limit times the mean bin count and redistribute the
    excess uniformly in one pass; total mass is conserved exactly."""
    if not (math.isfinite(clip_limit) and clip_limit >= 1.0):
        raise ValueError(f"clip limit must be >= 1, got {clip_limit}")
    hist = np.asarray(hist, dtype=np.int64)
    if hist.shape != (256,):
        raise ValueError(f"histogram must have 256 bins, got shape {hist.shape}")
    total = int(hist.sum())
    if total == 0:
        return hist.copy()
    limit = max(1, int(clip_limit * total / 256.0))
    clipped = np.minimum(hist, limit)
    excess = total - int(clipped.sum())
    clipped += excess // 256
    clipped[: excess % 256] += 1
    return clipped


def _tile_spans(size: int, tiles: int) -> list[tuple[int, int]]:
    base = size // tiles
    spans = [(i * base, (i + 1) * base) for i in range(tiles - 1)]
    spans.append(((tiles - 1) * base, size))
    return spans


def _interp_axis(centers: np.ndarray, size: int):
    """Neighbor tile indices and blend fraction per pixel coordinate, with
    clamp-to-edge outside the first/last tile center."""
    pos = np.arange(size, dtype=np.float64)
    left = np.searchsorted(centers, pos, side="right") - 1
    right = left + 1
    tiles = len(centers)
    inside = (left >= 0) & (right <= tiles - 1)
    left_c = np.clip(left, 0, tiles - 1)
    right_c = np.clip(right, 0, tiles - 1)
    frac = np.zeros(size, dtype=np.float64)
    np.divide(
        pos - centers[left_c],
        centers[right_c] - centers[left_c],
        out=frac,
        where=inside,
    )
    return left_c, right_c, frac


def clahe(r: Raster, params: ClaheParams) -> Raster:
    """Contrast-limited adaptive histogram equalization.

    With a 1x1 grid and clipping disabled this is bit-identical to
    equalize_hist; a constant raster is returned unchanged (the degenerate
    equalization rule applies per tile, before clipping).
    """
    _require_channels(r, 1, "clahe")
    if r.width < params.tiles_x or r.height < params.tiles_y:
        raise ValueError(
            f"tile grid {params.tiles_x}x{params.tiles_y} larger than image "
            f"{r.width}x{r.height}"
        )
    img = r.samples
    x_spans = _tile_spans(r.width, params.tiles_x)
    y_spans = _tile_spans(r.height, params.tiles_y)

    luts = np.empty((params.tiles_y, params.tiles_x, 256), dtype=np.float64)
    for ti, (y0, y1) in enumerate(y_spans):
        for tj, (x0, x1) in enumerate(x_spans):
            tile = img[y0:y1, x0:x1]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            if int(hist.max()) == tile.size:
                luts[ti, tj] = np.arange(256)
                continue
            if params.clip_limit is not None:
                hist = clip_histogram(hist, params.clip_limit)
            luts[ti, tj] = _equalize_lut(hist)

    centers_x = np.array([(x0 + x1 - 1) / 2.0 for x0, x1 in x_spans])
    centers_y = np.array([(y0 + y1 - 1) / 2.0 for y0, y1 in y_spans])
    jx0, jx1, fx = _interp_axis(centers_x, r.width)
    jy0, jy1, fy = _interp_axis(centers_y, r.height)

    tl = luts[jy0[:, None], jx0[None, :], img]
    tr = luts[jy0[:, None], jx1[None, :], img]
    bl = luts[jy1[:, None], jx0[None, :], img]
    br = luts[jy1[:, None], jx1[None, :], img]
    fxr = fx[None, :]
    top = tl + fxr * (tr - tl)
    bottom = bl + fxr * (br - bl)
    blended = top + fy[:, None] * (bottom - top)
    out = np.clip(np.rint(blended), 0, 255).astype(np.uint8)
    return Raster(r.width, r.height, 1, out)


def apply_on_luma(r: Raster, op: Callable[[Raster], Raster]) -> Raster:
    """Run a single-channel enhancement on the BT.601 luma plane of a color
    raster, keeping chroma at full precision; output clamped to [0, 255]."""
    _require_channels(r, 3, "apply_on_luma")
    rgb = r.samples.astype(np.float64)
    red, green, blue = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    luma = 0.299 * red + 0.587 * green + 0.114 * blue
    cb = 128.0 - 0.168736 * red - 0.331264 * green + 0.5 * blue
    cr = 128.0 + 0.5 * red - 0.418688 * green - 0.081312 * blue

    luma8 = np.clip(np.rint(luma), 0, 255).astype(np.uint8)
    enhanced = op(Raster(r.width, r.height, 1, luma8))
    if (enhanced.width, enhanced.height, enhanced.channels) != (r.width, r.height, 1):
        raise ValueError("luma enhancement changed raster geometry")
    y2 = enhanced.samples.astype(np.float64)

    out = np.empty_like(rgb)
    out[..., 0] = y2 + 1.402 * (cr - 128.0)
    out[..., 1] = y2 - 0.344136 * (cb - 128.0) - 0.714136 * (cr - 128.0)
    out[..., 2] = y2 + 1.772 * (cb - 128.0)
    return Raster(
        r.width, r.height, 3, np.clip(np.rint(out), 0, 255).astype(np.uint8)
    )
