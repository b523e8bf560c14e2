"""Run-length-encoded binary masks and the pixel-space operations built on them.

Coordinate convention: x grows to the right (columns), y grows downwards
(rows), origin at the top-left pixel. A run is a (row, start, length)
foreground interval. Masks are immutable; every operation returns a new mask.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptyMask
from .transforms import Pose2D

Run = tuple[int, int, int]


def _canonical_runs(runs: Iterable[Sequence[int]], width: int, height: int) -> tuple[Run, ...]:
    """Sort, bounds-check, and merge touching runs into canonical form."""
    cleaned: list[list[int]] = []
    for run in runs:
        row, start, length = int(run[0]), int(run[1]), int(run[2])
        if length <= 0:
            raise ValueError(f"run length must be positive, got {length}")
        if not (0 <= row < height):
            raise ValueError(f"run row {row} outside height {height}")
        if start < 0 or start + length > width:
            raise ValueError(f"run [{start}, {start + length}) outside width {width}")
        cleaned.append([row, start, length])
    cleaned.sort()
    merged: list[list[int]] = []
    for row, start, length in cleaned:
        if merged and merged[-1][0] == row:
            prev = merged[-1]
            prev_end = prev[1] + prev[2]
            if start < prev_end:
                raise ValueError(f"overlapping runs in row {row}")
            if start == prev_end:
                prev[2] += length
                continue
        merged.append([row, start, length])
    return tuple((r, s, n) for r, s, n in merged)


@dataclass(frozen=True)
class BinaryMask:
    """Immutable binary mask stored as row-major run-length encoding."""

    width: int
    height: int
    runs: tuple[Run, ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mask dimensions must be positive")
        object.__setattr__(self, "runs", _canonical_runs(self.runs, self.width, self.height))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "BinaryMask":
        arr = np.asarray(array, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("mask array must be 2-D")
        h, w = arr.shape
        padded = np.zeros((h, w + 2), dtype=np.int8)
        padded[:, 1:-1] = arr
        diff = np.diff(padded, axis=1)
        start_r, start_c = np.nonzero(diff == 1)
        end_r, end_c = np.nonzero(diff == -1)
        runs = tuple(
            (int(r), int(s), int(e - s))
            for r, s, e in zip(start_r, start_c, end_c)
        )
        return cls(w, h, runs)

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(width, height, ())

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(width, height, tuple((r, 0, width) for r in range(height)))

    @property
    def array(self) -> np.ndarray:
        """Decoded boolean array of shape (height, width), read-only."""
        cached = getattr(self, "_array", None)
        if cached is None:
            arr = np.zeros((self.height, self.width), dtype=bool)
            for row, start, length in self.runs:
                arr[row, start:start + length] = True
            arr.flags.writeable = False
            object.__setattr__(self, "_array", arr)
            cached = arr
        return cached

    @property
    def area(self) -> int:
        return sum(length for _, _, length in self.runs)

    @property
    def is_empty(self) -> bool:
        return not self.runs

    def pixels(self) -> np.ndarray:
        """Foreground pixel coordinates as an (n, 2) int array of (x, y)."""
        ys, xs = np.nonzero(self.array)
        return np.column_stack([xs, ys]).astype(np.int64)

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "runs": [[r, s, n] for r, s, n in self.runs],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BinaryMask":
        return cls(int(doc["width"]), int(doc["height"]),
                   tuple(tuple(run) for run in doc["runs"]))


def mask_bbox(mask: BinaryMask) -> tuple[int, int, int, int]:
    """Tightest (min_x, min_y, width, height) box containing all foreground."""
    if mask.is_empty:
        raise EmptyMask("cannot compute bounding box of an empty mask")
    min_y = mask.runs[0][0]
    max_y = mask.runs[-1][0]
    min_x = min(s for _, s, _ in mask.runs)
    max_x = max(s + n - 1 for _, s, n in mask.runs)
    return (min_x, min_y, max_x - min_x + 1, max_y - min_y + 1)


def mask_centroid(mask: BinaryMask) -> tuple[float, float]:
    """Arithmetic mean of foreground pixel coordinates."""
    if mask.is_empty:
        raise EmptyMask("cannot compute centroid of an empty mask")
    count = 0
    sum_x = 0.0
    sum_y = 0.0
    for row, start, length in mask.runs:
        count += length
        sum_y += row * length
        sum_x += length * start + length * (length - 1) / 2.0
    return (sum_x / count, sum_y / count)


def mask_crop_to_bbox(mask: BinaryMask) -> BinaryMask:
    """Mask content re-anchored so its tight bbox starts at the origin."""
    x0, y0, w, h = mask_bbox(mask)
    runs = tuple((r - y0, s - x0, n) for r, s, n in mask.runs)
    return BinaryMask(w, h, runs)


def mask_dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Grow the foreground by a Euclidean disk of the given radius."""
    if radius < 0:
        raise ValueError("dilation radius must be non-negative")
    if radius == 0 or mask.is_empty:
        return mask
    dist = ndimage.distance_transform_edt(~mask.array)
    return BinaryMask.from_array(dist <= radius)


def mask_contour(mask: BinaryMask, thickness: float) -> BinaryMask:
    """Foreground pixels within `thickness` of the mask boundary.

    The interior is left free, so a container keeps only its rim.
    """
    if thickness <= 0 or mask.is_empty:
        return BinaryMask.empty(mask.width, mask.height)
    dist = ndimage.distance_transform_edt(mask.array)
    return BinaryMask.from_array(mask.array & (dist <= thickness))


def _round_half_up(values: np.ndarray) -> np.ndarray:
    # deterministic nearest-pixel rule; avoids numpy's round-half-to-even
    return np.floor(values + 0.5).astype(np.int64)


def posed_pixels(mask: BinaryMask, pose: Pose2D) -> np.ndarray:
    """Absolute pixel coordinates of the mask posed in the workspace.

    The canonical mask is rotated about its own centroid and its centroid is
    placed at the pose centroid. Rasterization uses inverse mapping with
    nearest-pixel sampling, so the footprint has no holes.
    """
    if mask.is_empty:
        return np.zeros((0, 2), dtype=np.int64)
    cx, cy = mask_centroid(mask)
    x0, y0, bw, bh = mask_bbox(mask)
    corners = np.array(
        [[x0, y0], [x0 + bw - 1, y0], [x0, y0 + bh - 1], [x0 + bw - 1, y0 + bh - 1]],
        dtype=float,
    )
    cos_t = math.cos(pose.theta)
    sin_t = math.sin(pose.theta)
    rot = np.array([[cos_t, -sin_t], [sin_t, cos_t]])
    moved = (corners - [cx, cy]) @ rot.T + [pose.centroid_x, pose.centroid_y]
    lo = np.floor(moved.min(axis=0)).astype(np.int64) - 1
    hi = np.ceil(moved.max(axis=0)).astype(np.int64) + 1
    qx, qy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1))
    qx = qx.ravel()
    qy = qy.ravel()
    # inverse map back into canonical mask coordinates
    dx = qx - pose.centroid_x
    dy = qy - pose.centroid_y
    sx = _round_half_up(cos_t * dx + sin_t * dy + cx)
    sy = _round_half_up(-sin_t * dx + cos_t * dy + cy)
    valid = (sx >= 0) & (sx < mask.width) & (sy >= 0) & (sy < mask.height)
    sub = valid.nonzero()[0]
    hit = mask.array[sy[sub], sx[sub]]
    keep = sub[hit]
    return np.column_stack([qx[keep], qy[keep]])


def posed_mask(mask: BinaryMask, pose: Pose2D, width: int, height: int) -> BinaryMask:
    """Rasterize a posed mask onto a width x height canvas (clipped)."""
    pts = posed_pixels(mask, pose)
    arr = np.zeros((height, width), dtype=bool)
    if len(pts):
        inside = (pts[:, 0] >= 0) & (pts[:, 0] < width) & (pts[:, 1] >= 0) & (pts[:, 1] < height)
        pts = pts[inside]
        arr[pts[:, 1], pts[:, 0]] = True
    return BinaryMask.from_array(arr)


def _pixel_bounds(points: np.ndarray) -> tuple[int, int, int, int]:
    return (int(points[:, 0].min()), int(points[:, 1].min()),
            int(points[:, 0].max()), int(points[:, 1].max()))


def dilated_footprint(pixels: np.ndarray, margin: float) -> np.ndarray:
    """All integer pixels within Euclidean `margin` of the footprint, (n, 2)."""
    if len(pixels) == 0 or margin <= 0:
        return pixels
    pad = int(math.ceil(margin))
    x0, y0, x1, y1 = _pixel_bounds(pixels)
    w = x1 - x0 + 1 + 2 * (pad + 1)
    h = y1 - y0 + 1 + 2 * (pad + 1)
    grid = np.zeros((h, w), dtype=bool)
    grid[pixels[:, 1] - y0 + pad + 1, pixels[:, 0] - x0 + pad + 1] = True
    grown = ndimage.distance_transform_edt(~grid) <= margin
    ys, xs = np.nonzero(grown)
    return np.column_stack([xs + x0 - pad - 1, ys + y0 - pad - 1])


_HASH_STRIDE = 1 << 20  # supports coordinates in (-2^19, 2^19)


def _pixel_keys(pixels: np.ndarray) -> np.ndarray:
    return np.sort(pixels[:, 0].astype(np.int64) * _HASH_STRIDE + pixels[:, 1])


def footprints_overlap(pixels_a: np.ndarray, pixels_b: np.ndarray, margin: float) -> bool:
    """True iff the margin-dilated integer footprints share a pixel."""
    if len(pixels_a) == 0 or len(pixels_b) == 0:
        return False
    pad = int(math.ceil(margin))
    ax0, ay0, ax1, ay1 = _pixel_bounds(pixels_a)
    bx0, by0, bx1, by1 = _pixel_bounds(pixels_b)
    if (ax0 - pad > bx1 + pad or bx0 - pad > ax1 + pad
            or ay0 - pad > by1 + pad or by0 - pad > ay1 + pad):
        return False
    keys_a = _pixel_keys(dilated_footprint(pixels_a, margin))
    keys_b = _pixel_keys(dilated_footprint(pixels_b, margin))
    return bool(len(np.intersect1d(keys_a, keys_b, assume_unique=True)))


def masks_overlap(a: BinaryMask, pose_a: Pose2D, b: BinaryMask, pose_b: Pose2D,
                  margin: float = 0.0) -> bool:
    """True iff the posed, margin-dilated footprints share at least one pixel."""
    return footprints_overlap(posed_pixels(a, pose_a), posed_pixels(b, pose_b), margin)
