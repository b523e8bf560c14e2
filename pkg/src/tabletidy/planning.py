"""Metric projection, pick-and-place planning, and the 2D plan simulator.

The planner is a greedy loop: place any object whose goal footprint is
currently free; when everything is blocked, relocate one blocking object to a
collision-free intermediate pose near the workspace border. Every object
moves at most twice, so a plan has at most 2n moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NoIntermediateSpace, UnknownObject
from .layout import Layout, LayoutEntry
from .masks import footprints_overlap, posed_pixels
from .scene import CameraModel
from .transforms import Pose2D, normalize_angle

MoveKind = Literal["direct", "to_intermediate", "from_intermediate"]

POSITION_TOLERANCE = 1.0  # px, for "object already at goal" and final check
ANGLE_TOLERANCE = math.radians(1.0)
BORDER_SCAN_STRIDE = 4  # px


@dataclass(frozen=True)
class WorkspaceTransform:
    """Metric tabletop motion: translation in meters, rotation in radians."""

    dx: float
    dy: float
    dtheta: float

    def __post_init__(self):
        if not (math.isfinite(self.dx) and math.isfinite(self.dy)
                and math.isfinite(self.dtheta)):
            raise ValueError("workspace transform must be finite")
        object.__setattr__(self, "dtheta", normalize_angle(self.dtheta))


@dataclass(frozen=True)
class Move:
    object_id: str
    pick: Pose2D
    place: Pose2D
    kind: MoveKind

    def to_json(self) -> dict:
        return {
            "object_id": self.object_id,
            "kind": self.kind,
            "pick": self.pick.to_json(),
            "place": self.place.to_json(),
        }


@dataclass(frozen=True)
class PickPlacePlan:
    moves: tuple[Move, ...]

    def to_json(self, camera: CameraModel | None = None) -> dict:
        doc = {"moves": [m.to_json() for m in self.moves]}
        if camera is not None:
            for move, item in zip(self.moves, doc["moves"]):
                transform = to_workspace_transform(camera, move.pick, move.place)
                item["workspace"] = {
                    "pick_xy_m": list(pixel_to_workspace(
                        camera, (move.pick.centroid_x, move.pick.centroid_y))),
                    "place_xy_m": list(pixel_to_workspace(
                        camera, (move.place.centroid_x, move.place.centroid_y))),
                    "dx_m": transform.dx,
                    "dy_m": transform.dy,
                    "dtheta_rad": transform.dtheta,
                }
        return doc


@dataclass(frozen=True)
class SimReport:
    """Validation outcome: collision events plus the terminal layout.

    ``violations`` holds (move index, object ids); placement collisions use
    the index of the offending move, and objects that finish away from their
    goal are recorded once with index len(moves).
    """

    valid: bool
    violations: tuple[tuple[int, tuple[str, ...]], ...]
    final_layout: Layout

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [
                {"move_index": i, "object_ids": list(ids)}
                for i, ids in self.violations
            ],
            "final_layout": self.final_layout.to_json(),
        }


def pixel_to_workspace(camera: CameraModel, pixel: tuple[float, float]) -> tuple[float, float]:
    """Project an image pixel onto the table plane (meters)."""
    u, v = pixel
    return ((u - camera.cx) * camera.table_depth / camera.fx,
            (v - camera.cy) * camera.table_depth / camera.fy)


def to_workspace_transform(camera: CameraModel, initial_pose: Pose2D,
                           goal_pose: Pose2D) -> WorkspaceTransform:
    """Metric motion between two pixel-space poses under a top-down camera."""
    x0, y0 = pixel_to_workspace(
        camera, (initial_pose.centroid_x, initial_pose.centroid_y))
    x1, y1 = pixel_to_workspace(
        camera, (goal_pose.centroid_x, goal_pose.centroid_y))
    return WorkspaceTransform(dx=x1 - x0, dy=y1 - y0,
                              dtheta=goal_pose.theta - initial_pose.theta)


def _poses_match(a: Pose2D, b: Pose2D,
                 pos_tol: float = POSITION_TOLERANCE,
                 ang_tol: float = ANGLE_TOLERANCE) -> bool:
    return (math.hypot(a.centroid_x - b.centroid_x, a.centroid_y - b.centroid_y) <= pos_tol
            and abs(normalize_angle(a.theta - b.theta)) <= ang_tol)


def _border_scan_poses(entry: LayoutEntry, bounds: tuple[float, float, float, float],
                       stride: int = BORDER_SCAN_STRIDE) -> list[Pose2D]:
    """Candidate intermediate poses, nearest-to-border first.

    The raster covers the whole workspace so a crowded border degrades
    gracefully instead of failing, but border cells are tried first.
    """
    bx, by, bw, bh = bounds
    pts = posed_pixels(entry.mask, Pose2D(0.0, 0.0, entry.pose.theta))
    ox0, ox1 = float(pts[:, 0].min()), float(pts[:, 0].max())
    oy0, oy1 = float(pts[:, 1].min()), float(pts[:, 1].max())
    x_lo, x_hi = bx - ox0, bx + bw - 1 - ox1
    y_lo, y_hi = by - oy0, by + bh - 1 - oy1
    if x_lo > x_hi or y_lo > y_hi:
        return []
    xs = np.arange(x_lo, x_hi + 1e-9, stride)
    ys = np.arange(y_lo, y_hi + 1e-9, stride)
    candidates = []
    for y in ys:
        for x in xs:
            border_distance = min(x - x_lo, x_hi - x, y - y_lo, y_hi - y)
            candidates.append((border_distance, float(y), float(x)))
    candidates.sort()
    return [Pose2D(x, y, entry.pose.theta) for _, y, x in candidates]


def plan_moves(current: Layout, goal: Layout, margin: float = 2.0) -> PickPlacePlan:
    """Order pick-and-place moves from the current layout to the goal.

    Both layouts must contain the same ids with identical stationary poses,
    and the goal must be collision-free at the given margin.
    """
    current_ids = {e.object_id for e in current.entries}
    goal_ids = {e.object_id for e in goal.entries}
    if current_ids != goal_ids:
        raise UnknownObject(
            f"layouts disagree on ids: {sorted(current_ids ^ goal_ids)}")
    for e in current.entries:
        g = goal.entry(e.object_id)
        if not e.movable and not _poses_match(e.pose, g.pose, 1e-6, 1e-9):
            raise ValueError(f"stationary object {e.object_id!r} moves between layouts")
    from .layout import overlapping_pairs
    if overlapping_pairs(goal, margin):
        raise ValueError("goal layout has collisions at the planning margin")

    state: dict[str, Pose2D] = {e.object_id: e.pose for e in current.entries}
    feet: dict[str, np.ndarray] = {
        e.object_id: e.footprint() for e in current.entries}
    entries = {e.object_id: e for e in current.entries}
    goal_poses = {e.object_id: e.pose for e in goal.entries}
    goal_feet = {
        e.object_id: posed_pixels(entries[e.object_id].mask, e.pose)
        for e in goal.entries}

    pending = sorted(
        oid for oid, e in entries.items()
        if e.movable and not _poses_match(state[oid], goal_poses[oid], 1e-6, 1e-9))
    at_intermediate: set[str] = set()
    moves: list[Move] = []

    def goal_free(oid: str) -> bool:
        return not any(
            footprints_overlap(goal_feet[oid], feet[other], margin)
            for other in state if other != oid)

    while pending:
        placed_any = False
        for oid in list(pending):
            if not goal_free(oid):
                continue
            kind: MoveKind = "from_intermediate" if oid in at_intermediate else "direct"
            moves.append(Move(object_id=oid, pick=state[oid],
                              place=goal_poses[oid], kind=kind))
            state[oid] = goal_poses[oid]
            feet[oid] = goal_feet[oid]
            pending.remove(oid)
            at_intermediate.discard(oid)
            placed_any = True
        if placed_any or not pending:
            continue
        # deadlock: every pending goal is occupied; relocate the lowest-id
        # blocking object to the border
        blockers = sorted({
            other
            for oid in pending
            for other in state
            if other != oid and entries[other].movable
            and other not in at_intermediate
            and footprints_overlap(goal_feet[oid], feet[other], margin)
        })
        if not blockers:
            raise NoIntermediateSpace(
                "pending goals blocked but no movable blocker found")
        blocker = blockers[0]
        target = None
        for pose in _border_scan_poses(entries[blocker], current.bounds):
            candidate_feet = posed_pixels(entries[blocker].mask, pose)
            clashes = any(
                footprints_overlap(candidate_feet, feet[other], margin)
                for other in state if other != blocker)
            if not clashes:
                # an intermediate must not squat on anyone else's goal cell
                clashes = any(
                    footprints_overlap(candidate_feet, goal_feet[oid], margin)
                    for oid in pending if oid != blocker)
            if not clashes:
                target = pose
                break
        if target is None:
            raise NoIntermediateSpace(
                f"no collision-free intermediate pose for {blocker!r}")
        moves.append(Move(object_id=blocker, pick=state[blocker],
                          place=target, kind="to_intermediate"))
        state[blocker] = target
        feet[blocker] = posed_pixels(entries[blocker].mask, target)
        at_intermediate.add(blocker)
    return PickPlacePlan(moves=tuple(moves))


def simulate(plan: PickPlacePlan, start: Layout, goal: Layout,
             margin: float = 2.0) -> SimReport:
    """Replay a plan move by move and check collisions and goal attainment."""
    entries = {e.object_id: e for e in start.entries}
    state = {e.object_id: e.pose for e in start.entries}
    feet = {e.object_id: e.footprint() for e in start.entries}
    violations: list[tuple[int, tuple[str, ...]]] = []
    for index, move in enumerate(plan.moves):
        if move.object_id not in entries:
            raise UnknownObject(f"move {index} references unknown id {move.object_id!r}")
        placed = posed_pixels(entries[move.object_id].mask, move.place)
        clashing = tuple(sorted(
            other for other in state
            if other != move.object_id
            and footprints_overlap(placed, feet[other], margin)))
        if clashing:
            violations.append((index, clashing))
        state[move.object_id] = move.place
        feet[move.object_id] = placed
    mismatched = tuple(sorted(
        oid for oid, pose in state.items()
        if not _poses_match(pose, goal.entry(oid).pose)))
    if mismatched:
        violations.append((len(plan.moves), mismatched))
    final_entries = tuple(
        LayoutEntry(object_id=e.object_id, mask=e.mask, pose=state[e.object_id],
                    movable=e.movable)
        for e in start.entries)
    final_layout = Layout(entries=final_entries, bounds=start.bounds)
    return SimReport(valid=not violations, violations=tuple(violations),
                     final_layout=final_layout)
