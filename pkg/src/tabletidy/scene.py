"""Scene and candidate domain types plus JSON (de)serialization.

The on-disk formats are pinned by the schema files in ``tabletidy/data``;
loading validates against them and then applies the semantic checks the
schemas cannot express (bounds, unique ids, feature norms).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import jsonschema
import numpy as np

from .errors import SceneValidationError
from .masks import BinaryMask

FEATURE_NORM_TOL = 1e-6
DEFAULT_FEATURE_DIM = 512


def _load_schema(name: str) -> dict:
    text = resources.files("tabletidy.data").joinpath(name).read_text()
    return json.loads(text)


_SCENE_SCHEMA = _load_schema("scene.schema.json")
_CANDIDATE_SCHEMA = _load_schema("candidate.schema.json")


@dataclass(frozen=True)
class CameraModel:
    """Top-down pinhole camera over the table plane."""

    fx: float
    fy: float
    cx: float
    cy: float
    table_depth: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.table_depth <= 0:
            raise ValueError("table depth must be positive")

    def to_json(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "table_depth_m": self.table_depth}

    @classmethod
    def from_json(cls, doc: dict) -> "CameraModel":
        return cls(fx=float(doc["fx"]), fy=float(doc["fy"]), cx=float(doc["cx"]),
                   cy=float(doc["cy"]), table_depth=float(doc["table_depth_m"]))


@dataclass(frozen=True)
class ObjectInstance:
    """One object: mask, caption, class noun, semantic feature, movability."""

    id: str
    mask: BinaryMask
    caption: str
    class_noun: str
    feature: tuple[float, ...]
    movable: bool = True

    def __post_init__(self):
        if not self.id:
            raise ValueError("object id must be non-empty")
        if not self.class_noun:
            raise ValueError(f"object {self.id!r}: class_noun must be non-empty")
        if self.mask.is_empty:
            raise ValueError(f"object {self.id!r}: mask has no foreground pixels")
        norm = math.sqrt(sum(v * v for v in self.feature))
        if abs(norm - 1.0) >= FEATURE_NORM_TOL:
            raise ValueError(
                f"object {self.id!r}: feature norm {norm:.8f} is not unit")
        object.__setattr__(self, "feature", tuple(float(v) for v in self.feature))

    @property
    def feature_array(self) -> np.ndarray:
        return np.asarray(self.feature, dtype=float)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "caption": self.caption,
            "class_noun": self.class_noun,
            "movable": self.movable,
            "mask": self.mask.to_json(),
            "feature": list(self.feature),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ObjectInstance":
        return cls(
            id=doc["id"],
            mask=BinaryMask.from_json(doc["mask"]),
            caption=doc["caption"],
            class_noun=doc["class_noun"],
            feature=tuple(float(v) for v in doc["feature"]),
            movable=bool(doc["movable"]),
        )


def _check_objects(objects: Iterable[ObjectInstance], width: int, height: int,
                   what: str) -> None:
    seen: set[str] = set()
    dim = None
    for obj in objects:
        if obj.id in seen:
            raise SceneValidationError(f"{what}: duplicate object id {obj.id!r}")
        seen.add(obj.id)
        if obj.mask.width != width or obj.mask.height != height:
            raise SceneValidationError(
                f"{what}: object {obj.id!r} mask is {obj.mask.width}x{obj.mask.height}, "
                f"expected the image canvas {width}x{height}")
        if dim is None:
            dim = len(obj.feature)
        elif len(obj.feature) != dim:
            raise SceneValidationError(
                f"{what}: object {obj.id!r} feature dim {len(obj.feature)} != {dim}")


@dataclass(frozen=True)
class SceneDescription:
    """Object-level form of the initial observation."""

    image_width: int
    image_height: int
    objects: tuple[ObjectInstance, ...]
    table_edge_band: BinaryMask
    camera: CameraModel

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        band = self.table_edge_band
        if band.width != self.image_width or band.height != self.image_height:
            raise SceneValidationError("table_edge_band must cover the image canvas")
        _check_objects(self.objects, self.image_width, self.image_height, "scene")

    @property
    def movable_objects(self) -> tuple[ObjectInstance, ...]:
        return tuple(o for o in self.objects if o.movable)

    @property
    def stationary_objects(self) -> tuple[ObjectInstance, ...]:
        return tuple(o for o in self.objects if not o.movable)

    def object_by_id(self, object_id: str) -> ObjectInstance:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    def to_json(self) -> dict:
        return {
            "image_width": self.image_width,
            "image_height": self.image_height,
            "camera": self.camera.to_json(),
            "table_edge_band": self.table_edge_band.to_json(),
            "objects": [o.to_json() for o in self.objects],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SceneDescription":
        try:
            jsonschema.validate(doc, _SCENE_SCHEMA)
        except jsonschema.ValidationError as err:
            raise SceneValidationError(f"scene document: {err.message}") from err
        try:
            return cls(
                image_width=int(doc["image_width"]),
                image_height=int(doc["image_height"]),
                objects=tuple(ObjectInstance.from_json(o) for o in doc["objects"]),
                table_edge_band=BinaryMask.from_json(doc["table_edge_band"]),
                camera=CameraModel.from_json(doc["camera"]),
            )
        except (ValueError, KeyError) as err:
            raise SceneValidationError(str(err)) from err


@dataclass(frozen=True)
class CandidateScene:
    """Object-level form of one generated goal image."""

    image_width: int
    image_height: int
    objects: tuple[ObjectInstance, ...]
    source_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        _check_objects(self.objects, self.image_width, self.image_height,
                       f"candidate {self.source_tag!r}")

    @property
    def movable_objects(self) -> tuple[ObjectInstance, ...]:
        return tuple(o for o in self.objects if o.movable)

    def to_json(self) -> dict:
        return {
            "image_width": self.image_width,
            "image_height": self.image_height,
            "source_tag": self.source_tag,
            "objects": [o.to_json() for o in self.objects],
        }

    @classmethod
    def from_json(cls, doc: dict, source_tag: str = "") -> "CandidateScene":
        try:
            jsonschema.validate(doc, _CANDIDATE_SCHEMA)
        except jsonschema.ValidationError as err:
            raise SceneValidationError(f"candidate document: {err.message}") from err
        try:
            return cls(
                image_width=int(doc["image_width"]),
                image_height=int(doc["image_height"]),
                objects=tuple(ObjectInstance.from_json(o) for o in doc["objects"]),
                source_tag=doc.get("source_tag", source_tag),
            )
        except (ValueError, KeyError) as err:
            raise SceneValidationError(str(err)) from err


def load_scene(path: str | Path) -> SceneDescription:
    with open(path) as fh:
        doc = json.load(fh)
    return SceneDescription.from_json(doc)


def save_scene(scene: SceneDescription, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene.to_json(), indent=2, sort_keys=True) + "\n")


def load_candidate(path: str | Path) -> CandidateScene:
    with open(path) as fh:
        doc = json.load(fh)
    return CandidateScene.from_json(doc, source_tag=str(path))


def save_candidate(candidate: CandidateScene, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(candidate.to_json(), indent=2, sort_keys=True) + "\n")
