"""Zero-shot baselines and the missing-object completion benchmark.

The benchmark holds one object out of a human-made arrangement, keeps the
rest fixed, asks a method for the missing object's pose, and scores the
prediction against the user's set of acceptable poses with metric distance
and folded orientation error. Rotationally symmetric classes report no
orientation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DoesNotFit, EmptyList, NoFreePose, PlacementFailed
from .layout import Layout, LayoutEntry, layout_from_scene, overlapping_pairs
from .masks import footprints_overlap, mask_bbox, posed_pixels
from .planning import pixel_to_workspace
from .scene import CameraModel, ObjectInstance, SceneDescription
from .transforms import Pose2D, normalize_angle

SYMMETRIC_CLASSES = frozenset({"plate", "bowl", "orange", "apple"})

DEFAULT_MARGIN = 2.0


@dataclass(frozen=True)
class AcceptablePoseSet:
    """Ground-truth alternatives a user would accept for one object."""

    object_id: str
    poses: tuple[Pose2D, ...]

    def __post_init__(self):
        if not self.poses:
            raise ValueError("acceptable pose set needs at least one pose")
        object.__setattr__(self, "poses", tuple(self.poses))


@dataclass(frozen=True)
class PoseError:
    """Distance in centimeters; orientation in degrees, None when exempt."""

    distance_cm: float
    orientation_deg: float | None

    def __post_init__(self):
        if self.distance_cm < 0:
            raise ValueError("distance must be non-negative")
        if self.orientation_deg is not None and not (0 <= self.orientation_deg <= 180):
            raise ValueError("orientation error must fold into [0, 180] degrees")


@dataclass(frozen=True)
class ErrorSummary:
    median_cm: float
    median_deg: float | None  # None when every orientation was exempt

    def to_json(self) -> dict:
        return {"median_cm": self.median_cm, "median_deg": self.median_deg}


def _entry_for(obj: ObjectInstance, pose: Pose2D) -> LayoutEntry:
    from .masks import mask_crop_to_bbox

    return LayoutEntry(object_id=obj.id, mask=mask_crop_to_bbox(obj.mask),
                       pose=pose, movable=obj.movable)


def _fits_in_bounds(entry: LayoutEntry, bounds) -> bool:
    pts = entry.footprint()
    bx, by, bw, bh = bounds
    return (pts[:, 0].min() >= bx and pts[:, 0].max() <= bx + bw - 1
            and pts[:, 1].min() >= by and pts[:, 1].max() <= by + bh - 1)


def baseline_random(scene: SceneDescription, rng_seed: int = 0,
                    max_attempts: int = 1000,
                    margin: float = DEFAULT_MARGIN) -> Layout:
    """Uniform random poses, rejection-sampled to be collision-free.

    Stationary objects keep their observed poses; movable objects are placed
    one by one (id order) with uniform position and orientation until the
    footprint is inside the workspace and clear of everything already placed.
    """
    rng = np.random.default_rng(rng_seed)
    bounds = (0.0, 0.0, float(scene.image_width), float(scene.image_height))
    initial = layout_from_scene(scene)
    placed: list[LayoutEntry] = [e for e in initial.entries if not e.movable]
    for entry in sorted((e for e in initial.entries if e.movable),
                        key=lambda e: e.object_id):
        for _ in range(max_attempts):
            theta = float(rng.uniform(-math.pi, math.pi))
            x = float(rng.uniform(0, scene.image_width))
            y = float(rng.uniform(0, scene.image_height))
            candidate = replace(entry, pose=Pose2D(x, y, theta))
            if not _fits_in_bounds(candidate, bounds):
                continue
            feet = candidate.footprint()
            if any(footprints_overlap(feet, other.footprint(), margin)
                   for other in placed):
                continue
            placed.append(candidate)
            break
        else:
            raise PlacementFailed(
                f"no collision-free pose for {entry.object_id!r} "
                f"in {max_attempts} attempts")
    order = {e.object_id: i for i, e in enumerate(initial.entries)}
    placed.sort(key=lambda e: order[e.object_id])
    return Layout(entries=tuple(placed), bounds=bounds)


def _upright_theta(mask_w: int, mask_h: int) -> float:
    """Rotation putting the longer bbox axis vertical."""
    return math.pi / 2 if mask_w > mask_h else 0.0


def baseline_geometric(scene: SceneDescription,
                       margin: float = DEFAULT_MARGIN) -> Layout:
    """Evenly spaced row on the horizontal midline, long axes vertical."""
    bounds = (0.0, 0.0, float(scene.image_width), float(scene.image_height))
    initial = layout_from_scene(scene)
    movable = sorted((e for e in initial.entries if e.movable),
                     key=lambda e: e.object_id)
    stationary = [e for e in initial.entries if not e.movable]
    if not movable:
        return initial
    rotated = [replace(e, pose=Pose2D(0, 0, _upright_theta(e.mask.width, e.mask.height)))
               for e in movable]
    widths = []
    for e in rotated:
        pts = e.footprint()
        widths.append(float(pts[:, 0].max() - pts[:, 0].min() + 1))
    gap = (scene.image_width - sum(widths)) / (len(rotated) + 1)
    if gap < margin:
        raise DoesNotFit(
            f"{len(rotated)} objects of total width {sum(widths):.0f} px do not "
            f"fit on a {scene.image_width} px midline with margin {margin}")
    mid_y = scene.image_height / 2.0
    entries = list(stationary)
    x = gap
    for e, width in zip(rotated, widths):
        entries.append(replace(e, pose=Pose2D(x + width / 2.0, mid_y, e.pose.theta)))
        x += width + gap
    order = {e.object_id: i for i, e in enumerate(initial.entries)}
    entries.sort(key=lambda e: order[e.object_id])
    layout = Layout(entries=tuple(entries), bounds=bounds)
    if overlapping_pairs(layout, margin):
        raise DoesNotFit("midline row collides with stationary objects")
    return layout


def baseline_geometric_missing(scene: SceneDescription, fixed: Layout,
                               missing: ObjectInstance, step: float = 1.0,
                               margin: float = DEFAULT_MARGIN) -> Pose2D:
    """Place a missing object on the line through the two nearest fixed objects.

    Candidates advance in `step` px increments along the line (inside the
    segment and beyond both ends), ordered by distance to the nearer of the
    two defining centroids; the first collision-free pose wins. Orientation
    aligns the object's long bbox axis with the closest fixed object's.
    """
    if len(fixed.entries) < 2:
        raise NoFreePose("need at least two fixed objects to define a line")
    centroids = np.array([[e.pose.centroid_x, e.pose.centroid_y]
                          for e in fixed.entries])
    best_pair = None
    for i in range(len(centroids)):
        for j in range(i + 1, len(centroids)):
            d = float(np.linalg.norm(centroids[i] - centroids[j]))
            if best_pair is None or d < best_pair[0]:
                best_pair = (d, i, j)
    _, i, j = best_pair
    a, b = centroids[i], centroids[j]
    direction = b - a
    length = float(np.linalg.norm(direction))
    if length < 1e-9:
        direction = np.array([1.0, 0.0])
        length = 1.0
    direction = direction / length

    nearest_fixed = fixed.entries[i]
    theta = normalize_angle(
        _upright_theta(nearest_fixed.mask.width, nearest_fixed.mask.height)
        - _upright_theta(*(mask_bbox(missing.mask)[2:])))

    missing_entry = _entry_for(missing, Pose2D(0, 0, theta))
    bounds = fixed.bounds
    span = math.hypot(bounds[2], bounds[3])
    ts = np.arange(-span, length + span, step)
    # closest-to-the-fixed-pair first
    keyed = sorted(
        (min(abs(t), abs(t - length)), idx, t) for idx, t in enumerate(ts))
    fixed_feet = [e.footprint() for e in fixed.entries]
    for _, _, t in keyed:
        point = a + t * direction
        candidate = replace(missing_entry,
                            pose=Pose2D(float(point[0]), float(point[1]), theta))
        if not _fits_in_bounds(candidate, bounds):
            continue
        feet = candidate.footprint()
        if not any(footprints_overlap(feet, f, margin) for f in fixed_feet):
            return candidate.pose
    raise NoFreePose("no collision-free pose on or beyond the line")


def pose_error(predicted: Pose2D, acceptable: AcceptablePoseSet,
               camera: CameraModel, symmetric: bool = False) -> PoseError:
    """Error against the closest acceptable pose (selected by distance)."""
    px, py = pixel_to_workspace(
        camera, (predicted.centroid_x, predicted.centroid_y))
    best: tuple[float, Pose2D] | None = None
    for pose in acceptable.poses:
        ax, ay = pixel_to_workspace(camera, (pose.centroid_x, pose.centroid_y))
        distance = math.hypot(px - ax, py - ay)
        if best is None or distance < best[0]:
            best = (distance, pose)
    distance_m, closest = best
    if symmetric:
        orientation = None
    else:
        orientation = math.degrees(abs(normalize_angle(predicted.theta - closest.theta)))
    return PoseError(distance_cm=distance_m * 100.0, orientation_deg=orientation)


def aggregate_median(errors: Sequence[PoseError]) -> ErrorSummary:
    """Component-wise medians; exempt orientations are excluded."""
    if not errors:
        raise EmptyList("cannot aggregate zero errors")
    distances = [e.distance_cm for e in errors]
    orientations = [e.orientation_deg for e in errors if e.orientation_deg is not None]
    return ErrorSummary(
        median_cm=float(np.median(distances)),
        median_deg=float(np.median(orientations)) if orientations else None,
    )


@dataclass(frozen=True)
class EvalBundle:
    """A full user arrangement plus acceptable alternatives per object."""

    scene: SceneDescription
    acceptable: Mapping[str, AcceptablePoseSet]
    symmetric_ids: frozenset[str] = frozenset()

    def is_symmetric(self, object_id: str) -> bool:
        if object_id in self.symmetric_ids:
            return True
        return self.scene.object_by_id(object_id).class_noun in SYMMETRIC_CLASSES

    def to_json(self) -> dict:
        return {
            "scene": self.scene.to_json(),
            "acceptable_poses": {
                oid: [p.to_json() for p in poses.poses]
                for oid, poses in sorted(self.acceptable.items())
            },
            "symmetric_ids": sorted(self.symmetric_ids),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EvalBundle":
        scene = SceneDescription.from_json(doc["scene"])
        acceptable = {
            oid: AcceptablePoseSet(
                object_id=oid,
                poses=tuple(Pose2D.from_json(p) for p in poses))
            for oid, poses in doc["acceptable_poses"].items()
        }
        return cls(scene=scene, acceptable=acceptable,
                   symmetric_ids=frozenset(doc.get("symmetric_ids", ())))


def held_out_scene(bundle: EvalBundle, missing_id: str) -> SceneDescription:
    """Scene where every object except the held-out one is pinned."""
    objects = tuple(
        replace(obj, movable=(obj.id == missing_id))
        for obj in bundle.scene.objects
    )
    return replace(bundle.scene, objects=objects)


def fixed_objects_layout(bundle: EvalBundle, missing_id: str) -> Layout:
    """Layout of the fixed objects only (the held-out object removed)."""
    scene = held_out_scene(bundle, missing_id)
    base = layout_from_scene(scene)
    entries = tuple(e for e in base.entries if e.object_id != missing_id)
    return Layout(entries=entries, bounds=base.bounds)


PosePredictor = Callable[[EvalBundle, str], Pose2D]


def evaluate_method(bundles: Sequence[EvalBundle], predictor: PosePredictor
                    ) -> dict[str, ErrorSummary]:
    """Median errors per class noun for one method across bundles."""
    per_noun: dict[str, list[PoseError]] = {}
    for bundle in bundles:
        for obj in bundle.scene.objects:
            predicted = predictor(bundle, obj.id)
            err = pose_error(
                predicted, bundle.acceptable[obj.id], bundle.scene.camera,
                symmetric=bundle.is_symmetric(obj.id))
            per_noun.setdefault(obj.class_noun, []).append(err)
    return {noun: aggregate_median(errs) for noun, errs in sorted(per_noun.items())}


def format_report_table(report: Mapping[str, Mapping[str, ErrorSummary]]) -> str:
    """Plain-text table: one row per method, one object column, cm / deg cells."""
    nouns = sorted({noun for cells in report.values() for noun in cells})
    header = ["method"] + nouns
    rows = [header, ["" for _ in header]]
    for method, cells in report.items():
        row = [method]
        for noun in nouns:
            summary = cells.get(noun)
            if summary is None:
                row.append("-")
            elif summary.median_deg is None:
                row.append(f"{summary.median_cm:.2f} / -")
            else:
                row.append(f"{summary.median_cm:.2f} / {summary.median_deg:.2f}")
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    rows[1] = ["-" * w for w in widths]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows)
