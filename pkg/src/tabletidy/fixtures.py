"""Bundled example scenes: dining, office, and fruit-basket tabletops.

Run ``python -m tabletidy.fixtures OUTDIR`` to regenerate the fixture files
the README and tests refer to. Everything is deterministic.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .evaluation import AcceptablePoseSet, EvalBundle
from .masks import BinaryMask
from .prompting import build_prompt, InpaintMask
from .providers import GenerationRequest
from .providers.synthetic import SyntheticProvider
from .scene import CameraModel, SceneDescription, save_candidate, save_scene
from .shapes import make_object
from .transforms import Pose2D

CANVAS = 256
FEATURE_DIM = 512

DEFAULT_CAMERA = CameraModel(fx=500.0, fy=500.0, cx=CANVAS / 2, cy=CANVAS / 2,
                             table_depth=0.5)


def border_band(width: int, height: int, thickness: int = 6) -> BinaryMask:
    arr = np.ones((height, width), dtype=bool)
    arr[thickness:-thickness, thickness:-thickness] = False
    return BinaryMask.from_array(arr)


def _scene(objects, camera=DEFAULT_CAMERA, canvas=CANVAS) -> SceneDescription:
    return SceneDescription(
        image_width=canvas, image_height=canvas, objects=tuple(objects),
        table_edge_band=border_band(canvas, canvas), camera=camera)


def dining_scene(seed: int = 101) -> SceneDescription:
    """Scattered dining objects: fork, knife, plate, spoon.

    Orientations stay upright: the bbox-equalizing rescale absorbs most of an
    elongated object's rotation before ICP sees it, so heavily rotated
    initial cutlery would not close the loop onto the template precisely.
    """
    rng = np.random.default_rng(seed)
    objects = [
        make_object("fork-0", "fork", Pose2D(70, 178, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a stainless steel fork on a wooden table"),
        make_object("knife-0", "knife", Pose2D(180, 70, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a kitchen knife on a wooden table"),
        make_object("plate-0", "plate", Pose2D(110, 95, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a white plate on a wooden table"),
        make_object("spoon-0", "spoon", Pose2D(205, 170, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a metal spoon on a wooden table"),
    ]
    return _scene(objects)


def office_scene(seed: int = 102) -> SceneDescription:
    """Keyboard, mouse, and mug around a tablet the robot must not move."""
    rng = np.random.default_rng(seed)
    objects = [
        make_object("tablet-0", "tablet", Pose2D(128, 64, 0.0),
                    CANVAS, CANVAS, rng, movable=False,
                    caption="a tablet propped on a desk"),
        make_object("keyboard-0", "keyboard", Pose2D(70, 190, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a black keyboard on a desk"),
        make_object("mouse-0", "mouse", Pose2D(205, 120, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a computer mouse on a desk"),
        make_object("mug-0", "mug", Pose2D(170, 210, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a coffee mug on a desk"),
    ]
    return _scene(objects)


def fruit_scene(seed: int = 103) -> SceneDescription:
    """Two apples and an orange scattered near a fixed basket."""
    rng = np.random.default_rng(seed)
    objects = [
        make_object("basket-0", "basket", Pose2D(66, 66, 0.0),
                    CANVAS, CANVAS, rng, movable=False,
                    caption="a wicker basket on a table"),
        make_object("apple-0", "apple", Pose2D(190, 70, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="a red apple on a wooden table"),
        make_object("apple-1", "apple", Pose2D(210, 170, math.radians(15)),
                    CANVAS, CANVAS, rng,
                    caption="a green apple on a wooden table"),
        make_object("orange-0", "orange", Pose2D(120, 205, 0.0),
                    CANVAS, CANVAS, rng,
                    caption="an orange on a wooden table"),
    ]
    return _scene(objects)


def dining_arrangement_scene(seed: int = 104) -> SceneDescription:
    """A tidy user-made place setting, used by the missing-object benchmark."""
    rng = np.random.default_rng(seed)
    cx, cy = CANVAS / 2, CANVAS / 2
    objects = [
        make_object("fork-0", "fork", Pose2D(cx - 46, cy, 0.0), CANVAS, CANVAS, rng,
                    caption="a stainless steel fork on a wooden table"),
        make_object("knife-0", "knife", Pose2D(cx + 36, cy, 0.0), CANVAS, CANVAS, rng,
                    caption="a kitchen knife on a wooden table"),
        make_object("plate-0", "plate", Pose2D(cx, cy, 0.0), CANVAS, CANVAS, rng,
                    caption="a white plate on a wooden table"),
        make_object("spoon-0", "spoon", Pose2D(cx + 58, cy, 0.0), CANVAS, CANVAS, rng,
                    caption="a metal spoon on a wooden table"),
    ]
    return _scene(objects)


def dining_eval_bundle(seed: int = 104) -> EvalBundle:
    """Acceptable poses: the arrangement itself plus mirrored alternatives."""
    scene = dining_arrangement_scene(seed)
    cx, cy = CANVAS / 2, CANVAS / 2
    acceptable = {
        "fork-0": AcceptablePoseSet("fork-0", (
            Pose2D(cx - 46, cy, 0.0),
            Pose2D(cx - 62, cy, 0.0),
        )),
        "knife-0": AcceptablePoseSet("knife-0", (
            Pose2D(cx + 36, cy, 0.0),
            Pose2D(cx + 36, cy, math.pi),
        )),
        "plate-0": AcceptablePoseSet("plate-0", (
            Pose2D(cx, cy, 0.0),
            Pose2D(cx, cy - 10, 0.0),
        )),
        "spoon-0": AcceptablePoseSet("spoon-0", (
            Pose2D(cx + 58, cy, 0.0),
            Pose2D(cx - 62, cy, 0.0),
        )),
    }
    return EvalBundle(scene=scene, acceptable=acceptable)


def write_fixture_files(out_dir: str | Path) -> list[Path]:
    """Write all fixture scenes, the eval bundle, and a fixture-provider dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    scenes = {
        "dining_scene.json": dining_scene(),
        "office_scene.json": office_scene(),
        "fruit_scene.json": fruit_scene(),
    }
    for name, scene in scenes.items():
        save_scene(scene, out / name)
        written.append(out / name)

    bundle_path = out / "dining_eval_bundle.json"
    bundle_path.write_text(
        json.dumps(dining_eval_bundle().to_json(), indent=2, sort_keys=True) + "\n")
    written.append(bundle_path)

    # canned candidates so the fixture provider has something to serve
    provider = SyntheticProvider("place-setting")
    scene = scenes["dining_scene.json"]
    from .prompting import scene_prompt
    from .prompting import compose_inpaint_mask
    request = GenerationRequest(
        prompt=scene_prompt(scene),
        inpaint=compose_inpaint_mask(scene),
        batch_size=4, seed=7)
    candidate_dir = out / "candidates"
    candidate_dir.mkdir(exist_ok=True)
    for i, candidate in enumerate(provider.generate_batch(request)):
        path = candidate_dir / f"dining_{i:02d}.candidate.json"
        save_candidate(candidate, path)
        written.append(path)

    config_path = out / "pipeline.config.json"
    from .pipeline import PipelineConfig
    config_path.write_text(
        json.dumps(PipelineConfig().to_json(), indent=2, sort_keys=True) + "\n")
    written.append(config_path)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    for path in write_fixture_files(target):
        print(path)
