"""Synthetic goal provider: parameterized arrangement templates with jitter.

Templates give the test suite a closed loop: the provider "generates" a
candidate whose object poses are known, so an end-to-end run can be checked
against the very arrangement the provider drew.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..scene import CandidateScene
from ..shapes import make_object
from ..transforms import Pose2D
from .base import GenerationRequest

POSITION_JITTER = 2.0  # px, uniform half-range
ANGLE_JITTER = math.radians(2.0)


def _place_setting(nouns: list[str], width: int, height: int) -> list[Pose2D]:
    cx, cy = width / 2.0, height / 2.0
    slots = {
        "plate": Pose2D(cx, cy, 0.0),
        "fork": Pose2D(cx - 46, cy, 0.0),
        "knife": Pose2D(cx + 36, cy, 0.0),
        "spoon": Pose2D(cx + 58, cy, 0.0),
        "napkin": Pose2D(cx - 62, cy, 0.0),
        "mug": Pose2D(cx + 48, cy - 48, 0.0),
    }
    return _fill_slots(nouns, slots, width, height)


def _office(nouns: list[str], width: int, height: int) -> list[Pose2D]:
    cx = width / 2.0
    low = height * 0.68
    slots = {
        "keyboard": Pose2D(cx, low, 0.0),
        "mouse": Pose2D(cx + 46, low, 0.0),
        "mug": Pose2D(cx - 52, low, 0.0),
        "notebook": Pose2D(cx - 54, low - 50, 0.0),
        "pen": Pose2D(cx + 44, low - 50, 0.0),
    }
    return _fill_slots(nouns, slots, width, height)


def _fruit_circle(nouns: list[str], width: int, height: int) -> list[Pose2D]:
    cx, cy = width / 2.0, height / 2.0
    radius = min(width, height) * 0.14
    poses = []
    for i, _ in enumerate(nouns):
        angle = math.pi / 2 + i * 2 * math.pi / max(len(nouns), 1)
        poses.append(Pose2D(cx + radius * math.cos(angle),
                            cy + radius * math.sin(angle), 0.0))
    return poses


def _fill_slots(nouns: list[str], slots: dict[str, Pose2D],
                width: int, height: int) -> list[Pose2D]:
    poses = []
    used: dict[str, int] = {}
    spare = 0
    for noun in nouns:
        count = used.get(noun, 0)
        used[noun] = count + 1
        if noun in slots and count == 0:
            poses.append(slots[noun])
        else:
            # duplicates and unknown nouns go to an overflow row at the bottom
            poses.append(Pose2D(24 + 36 * spare, height - 28, 0.0))
            spare += 1
    return poses


_TEMPLATES = {
    "place-setting": _place_setting,
    "office": _office,
    "fruit-circle": _fruit_circle,
}


def template_names() -> tuple[str, ...]:
    return tuple(sorted(_TEMPLATES))


@dataclass(frozen=True)
class SyntheticProvider:
    """Deterministic provider drawing jittered instances of one template."""

    template: str

    def __post_init__(self):
        if self.template not in _TEMPLATES:
            raise ValueError(
                f"unknown template {self.template!r}; known: {', '.join(template_names())}")

    def template_poses(self, nouns: list[str], width: int, height: int,
                       seed: int | None, index: int) -> list[Pose2D]:
        """Jittered template poses for candidate `index` of a batch."""
        base = _TEMPLATES[self.template](nouns, width, height)
        rng = self._rng(seed, index)
        poses = []
        for pose in base:
            dx, dy = rng.uniform(-POSITION_JITTER, POSITION_JITTER, 2)
            dtheta = rng.uniform(-ANGLE_JITTER, ANGLE_JITTER)
            poses.append(Pose2D(pose.centroid_x + dx, pose.centroid_y + dy,
                                pose.theta + dtheta))
        return poses

    @staticmethod
    def _rng(seed: int | None, index: int) -> np.random.Generator:
        return np.random.default_rng([0 if seed is None else seed, index])

    def candidate(self, request: GenerationRequest, index: int) -> CandidateScene:
        nouns = list(request.prompt.noun_list)
        width = request.inpaint.width
        height = request.inpaint.height
        poses = self.template_poses(nouns, width, height, request.seed, index)
        rng = self._rng(request.seed, index)
        rng.uniform(size=3 * len(nouns))  # keep pose and feature streams apart
        objects = [
            make_object(f"gen-{i}", noun, pose, width, height, rng, movable=True)
            for i, (noun, pose) in enumerate(zip(nouns, poses))
        ]
        tag = f"synthetic:{self.template}:seed={request.seed}:item={index}"
        return CandidateScene(image_width=width, image_height=height,
                              objects=tuple(objects), source_tag=tag)

    def generate_batch(self, request: GenerationRequest) -> list[CandidateScene]:
        return [self.candidate(request, i) for i in range(request.batch_size)]
