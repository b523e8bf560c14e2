"""Planar rigid transforms and poses in pixel space."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    wrapped = theta % TAU
    if wrapped > math.pi:
        wrapped -= TAU
    return wrapped


@dataclass(frozen=True)
class RigidTransform2D:
    """3-DoF rigid motion p -> R(theta) @ p + (tx, ty), in pixels."""

    tx: float
    ty: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @classmethod
    def identity(cls) -> "RigidTransform2D":
        return cls(0.0, 0.0, 0.0)

    @property
    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (n, 2) array of (x, y) points."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + [self.tx, self.ty]

    def apply_point(self, x: float, y: float) -> tuple[float, float]:
        out = self.apply(np.array([[x, y]]))
        return (float(out[0, 0]), float(out[0, 1]))

    def compose(self, other: "RigidTransform2D") -> "RigidTransform2D":
        """Transform equal to applying `other` first, then `self`."""
        tx, ty = self.apply_point(other.tx, other.ty)
        return RigidTransform2D(tx, ty, self.theta + other.theta)

    def inverse(self) -> "RigidTransform2D":
        c, s = math.cos(self.theta), math.sin(self.theta)
        # R(-theta) @ -t
        return RigidTransform2D(-(c * self.tx + s * self.ty),
                                -(-s * self.tx + c * self.ty),
                                -self.theta)


@dataclass(frozen=True)
class Pose2D:
    """Where a canonical mask sits: its centroid position and rotation."""

    centroid_x: float
    centroid_y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def translated(self, dx: float, dy: float) -> "Pose2D":
        return Pose2D(self.centroid_x + dx, self.centroid_y + dy, self.theta)

    def to_json(self) -> dict:
        return {"centroid_x": self.centroid_x, "centroid_y": self.centroid_y,
                "theta": self.theta}

    @classmethod
    def from_json(cls, doc: dict) -> "Pose2D":
        return cls(float(doc["centroid_x"]), float(doc["centroid_y"]),
                   float(doc["theta"]))
