"""Goal-layout post-processing: anchor, scale normalization, collision push-out.

A layout is the set of posed canonical masks inside a workspace rectangle.
The anchor is the most central object; scale normalization corrects the
generator's size drift by moving every centroid toward or away from the
anchor; collision resolution pushes overlapping objects radially outward from
the anchor until the arrangement is collision-free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyLayout, OutOfBounds, Unresolvable
from .masks import (
    BinaryMask,
    _pixel_bounds,
    _pixel_keys,
    dilated_footprint,
    footprints_overlap,
    mask_bbox,
    mask_centroid,
    mask_crop_to_bbox,
    posed_pixels,
)
from .scene import SceneDescription
from .transforms import Pose2D

DEFAULT_MARGIN = 2.0
DEFAULT_STEP = 2.0
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class LayoutEntry:
    object_id: str
    mask: BinaryMask  # canonical, bbox-cropped
    pose: Pose2D
    movable: bool = True

    def footprint(self) -> np.ndarray:
        return posed_pixels(self.mask, self.pose)


@dataclass(frozen=True)
class Layout:
    """Posed objects inside a workspace rectangle (x, y, width, height)."""

    entries: tuple[LayoutEntry, ...]
    bounds: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.object_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("layout entries must have unique object ids")

    def entry(self, object_id: str) -> LayoutEntry:
        for e in self.entries:
            if e.object_id == object_id:
                return e
        raise KeyError(object_id)

    def index_of(self, object_id: str) -> int:
        for i, e in enumerate(self.entries):
            if e.object_id == object_id:
                return i
        raise KeyError(object_id)

    def poses(self) -> dict[str, Pose2D]:
        return {e.object_id: e.pose for e in self.entries}

    def with_pose(self, object_id: str, pose: Pose2D) -> "Layout":
        entries = tuple(
            replace(e, pose=pose) if e.object_id == object_id else e
            for e in self.entries)
        return Layout(entries=entries, bounds=self.bounds)

    def to_json(self) -> dict:
        return {
            "bounds": list(self.bounds),
            "entries": [
                {
                    "object_id": e.object_id,
                    "movable": e.movable,
                    "pose": e.pose.to_json(),
                    "mask": e.mask.to_json(),
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Layout":
        entries = tuple(
            LayoutEntry(
                object_id=item["object_id"],
                mask=BinaryMask.from_json(item["mask"]),
                pose=Pose2D.from_json(item["pose"]),
                movable=bool(item["movable"]),
            )
            for item in doc["entries"]
        )
        return cls(entries=entries, bounds=tuple(float(v) for v in doc["bounds"]))


def layout_from_scene(scene: SceneDescription) -> Layout:
    """Initial layout: every object's cropped mask at its observed pose."""
    entries = []
    for obj in scene.objects:
        cx, cy = mask_centroid(obj.mask)
        entries.append(LayoutEntry(
            object_id=obj.id,
            mask=mask_crop_to_bbox(obj.mask),
            pose=Pose2D(cx, cy, 0.0),
            movable=obj.movable,
        ))
    return Layout(entries=tuple(entries),
                  bounds=(0.0, 0.0, float(scene.image_width), float(scene.image_height)))


def anchor_index(layout: Layout) -> int:
    """Index of the entry with minimum cumulative centroid distance.

    Distances are summed over all other entries; ties break to the lowest
    index. The anchor may be stationary: it is the scene's most central
    object, and it never moves either way.
    """
    if not layout.entries:
        raise EmptyLayout("anchor of an empty layout")
    centroids = np.array([[e.pose.centroid_x, e.pose.centroid_y]
                          for e in layout.entries])
    diffs = centroids[:, None, :] - centroids[None, :, :]
    cumulative = np.sqrt((diffs ** 2).sum(axis=2)).sum(axis=1)
    return int(np.argmin(cumulative))


def scale_normalize(layout: Layout, size_ratios: Mapping[str, float]) -> Layout:
    """Scale all centroid offsets from the anchor by the median size ratio.

    ``size_ratios`` maps object ids to sqrt(initial area / goal area); the
    median of the provided values is the global factor, robust to one badly
    generated object. Orientations do not change and the anchor stays fixed;
    stationary objects never move.
    """
    if not size_ratios:
        return layout
    ratios = np.array(list(size_ratios.values()), dtype=float)
    if np.any(ratios <= 0):
        raise ValueError("size ratios must be positive")
    factor = float(np.median(ratios))
    anchor = layout.entries[anchor_index(layout)]
    ax, ay = anchor.pose.centroid_x, anchor.pose.centroid_y
    entries = []
    for e in layout.entries:
        if not e.movable or e.object_id == anchor.object_id:
            entries.append(e)
            continue
        nx = ax + factor * (e.pose.centroid_x - ax)
        ny = ay + factor * (e.pose.centroid_y - ay)
        entries.append(replace(e, pose=Pose2D(nx, ny, e.pose.theta)))
    return Layout(entries=tuple(entries), bounds=layout.bounds)


def _footprint_bounds_offsets(entry: LayoutEntry) -> tuple[float, float, float, float]:
    """Footprint bbox relative to the centroid at the entry's rotation."""
    pts = entry.footprint()
    x0 = pts[:, 0].min() - entry.pose.centroid_x
    x1 = pts[:, 0].max() - entry.pose.centroid_x
    y0 = pts[:, 1].min() - entry.pose.centroid_y
    y1 = pts[:, 1].max() - entry.pose.centroid_y
    return (float(x0), float(x1), float(y0), float(y1))


def overlapping_pairs(layout: Layout, margin: float = DEFAULT_MARGIN) -> list[tuple[int, int]]:
    """Index pairs of entries whose margin-dilated footprints intersect."""
    feet = [e.footprint() for e in layout.entries]
    pairs = []
    for i in range(len(feet)):
        for j in range(i + 1, len(feet)):
            if footprints_overlap(feet[i], feet[j], margin):
                pairs.append((i, j))
    return pairs


def resolve_collisions(layout: Layout, margin: float = DEFAULT_MARGIN,
                       step: float = DEFAULT_STEP, max_iter: int = DEFAULT_MAX_ITER,
                       trace: list | None = None) -> Layout:
    """Push overlapping objects radially away from the anchor until clear.

    Every movable, non-anchor member of an overlapping pair moves ``step``
    pixels along the ray from the anchor through its centroid (objects
    sitting exactly on the anchor leave along index * 2*pi/n). Moves clamp so
    footprints stay inside the bounds; if the layout still has overlaps after
    ``max_iter`` sweeps it is Unresolvable. Objects whose footprint cannot
    fit in the workspace at all raise OutOfBounds up front. When ``trace`` is
    given, per-iteration centroid snapshots are appended to it.
    """
    bx, by, bw, bh = layout.bounds
    n = len(layout.entries)
    if n == 0:
        return layout
    anchor = anchor_index(layout)
    entries = list(layout.entries)
    offsets = [_footprint_bounds_offsets(e) for e in entries]
    for e, (ox0, ox1, oy0, oy1) in zip(entries, offsets):
        if ox1 - ox0 > bw or oy1 - oy0 > bh:
            raise OutOfBounds(
                f"object {e.object_id!r} footprint does not fit in the workspace")

    def clamp(index: int, x: float, y: float) -> tuple[float, float]:
        ox0, ox1, oy0, oy1 = offsets[index]
        return (min(max(x, bx - ox0), bx + bw - 1 - ox1),
                min(max(y, by - oy0), by + bh - 1 - oy1))

    # pre-pass: pull any movable footprint back inside the workspace so the
    # push loop only ever moves objects outward
    for k, e in enumerate(entries):
        if not e.movable:
            continue
        cx, cy = clamp(k, e.pose.centroid_x, e.pose.centroid_y)
        if (cx, cy) != (e.pose.centroid_x, e.pose.centroid_y):
            entries[k] = replace(e, pose=Pose2D(cx, cy, e.pose.theta))

    def collision_key(entry: LayoutEntry):
        grown = dilated_footprint(entry.footprint(), margin)
        return (_pixel_keys(grown), _pixel_bounds(grown))

    def keys_clash(a, b) -> bool:
        (ka, (ax0, ay0, ax1, ay1)), (kb, (bx0, by0, bx1, by1)) = a, b
        if ax0 > bx1 or bx0 > ax1 or ay0 > by1 or by0 > ay1:
            return False
        return bool(len(np.intersect1d(ka, kb, assume_unique=True)))

    keys = {i: collision_key(e) for i, e in enumerate(entries)}
    for _ in range(max_iter):
        pairs = [
            (i, j)
            for i in range(n) for j in range(i + 1, n)
            if keys_clash(keys[i], keys[j])
        ]
        if not pairs:
            out = Layout(entries=tuple(entries), bounds=layout.bounds)
            if trace is not None:
                trace.append({e.object_id: (e.pose.centroid_x, e.pose.centroid_y)
                              for e in entries})
            return out
        movers = sorted({
            k for pair in pairs for k in pair
            if k != anchor and entries[k].movable
        })
        ax = entries[anchor].pose.centroid_x
        ay = entries[anchor].pose.centroid_y
        for k in movers:
            pose = entries[k].pose
            dx = pose.centroid_x - ax
            dy = pose.centroid_y - ay
            norm = math.hypot(dx, dy)
            if norm < 1e-9:
                angle = k * 2.0 * math.pi / n
                dx, dy = math.cos(angle), math.sin(angle)
            else:
                dx, dy = dx / norm, dy / norm
            nx, ny = clamp(k, pose.centroid_x + step * dx, pose.centroid_y + step * dy)
            entries[k] = replace(entries[k], pose=Pose2D(nx, ny, pose.theta))
            keys[k] = collision_key(entries[k])
        if trace is not None:
            trace.append({e.object_id: (e.pose.centroid_x, e.pose.centroid_y)
                          for e in entries})
    raise Unresolvable(f"collisions remain after {max_iter} iterations")
