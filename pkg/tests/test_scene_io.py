import json
import math

import numpy as np
import pytest

from tabletidy.errors import SceneValidationError
from tabletidy.masks import BinaryMask
from tabletidy.scene import (
    CameraModel,
    CandidateScene,
    ObjectInstance,
    SceneDescription,
    load_scene,
    save_scene,
)


def unit(dim, axis=0):
    v = np.zeros(dim)
    v[axis] = 1.0
    return tuple(v)


def simple_mask(width=16, height=16):
    arr = np.zeros((height, width), dtype=bool)
    arr[4:8, 4:8] = True
    return BinaryMask.from_array(arr)


def simple_scene():
    return SceneDescription(
        image_width=16,
        image_height=16,
        objects=(
            ObjectInstance(id="obj-1", mask=simple_mask(), caption="a plate",
                           class_noun="plate", feature=unit(8), movable=True),
        ),
        table_edge_band=BinaryMask.empty(16, 16),
        camera=CameraModel(fx=100, fy=110, cx=8, cy=8, table_depth=0.5),
    )


def test_round_trip(tmp_path):
    scene = simple_scene()
    path = tmp_path / "scene.json"
    save_scene(scene, path)
    assert load_scene(path) == scene


def test_schema_rejects_missing_fields(tmp_path):
    doc = simple_scene().to_json()
    del doc["camera"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SceneValidationError):
        load_scene(path)


def test_schema_rejects_unknown_fields(tmp_path):
    doc = simple_scene().to_json()
    doc["extra"] = 1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SceneValidationError):
        load_scene(path)


def test_duplicate_ids_rejected():
    obj = simple_scene().objects[0]
    with pytest.raises(SceneValidationError):
        SceneDescription(
            image_width=16, image_height=16, objects=(obj, obj),
            table_edge_band=BinaryMask.empty(16, 16),
            camera=CameraModel(fx=100, fy=100, cx=8, cy=8, table_depth=0.5),
        )


def test_mask_must_cover_canvas():
    obj = ObjectInstance(id="o", mask=simple_mask(8, 8), caption="a mug",
                         class_noun="mug", feature=unit(4), movable=True)
    with pytest.raises(SceneValidationError):
        SceneDescription(
            image_width=16, image_height=16, objects=(obj,),
            table_edge_band=BinaryMask.empty(16, 16),
            camera=CameraModel(fx=100, fy=100, cx=8, cy=8, table_depth=0.5),
        )


def test_feature_must_be_unit_norm():
    with pytest.raises(ValueError):
        ObjectInstance(id="o", mask=simple_mask(), caption="a mug",
                       class_noun="mug", feature=(0.5, 0.5), movable=True)
    ok = 1.0 / math.sqrt(2.0)
    ObjectInstance(id="o", mask=simple_mask(), caption="a mug",
                   class_noun="mug", feature=(ok, ok), movable=True)


def test_empty_object_mask_rejected():
    with pytest.raises(ValueError):
        ObjectInstance(id="o", mask=BinaryMask.empty(16, 16), caption="a mug",
                       class_noun="mug", feature=unit(4), movable=True)


def test_candidate_round_trip():
    cand = CandidateScene(
        image_width=16, image_height=16,
        objects=simple_scene().objects, source_tag="test")
    doc = cand.to_json()
    assert CandidateScene.from_json(doc) == cand


def test_candidate_schema_rejects_bad_runs():
    doc = CandidateScene(
        image_width=16, image_height=16,
        objects=simple_scene().objects, source_tag="t").to_json()
    doc["objects"][0]["mask"]["runs"] = [[0, 0]]
    with pytest.raises(SceneValidationError):
        CandidateScene.from_json(doc)


def test_camera_validation():
    with pytest.raises(ValueError):
        CameraModel(fx=0, fy=1, cx=0, cy=0, table_depth=1)
    with pytest.raises(ValueError):
        CameraModel(fx=1, fy=1, cx=0, cy=0, table_depth=0)
