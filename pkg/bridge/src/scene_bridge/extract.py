"""Image-to-scene extraction: the orchestration behind `scene-bridge extract`."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from PIL import Image

from .backends import (
    Captioner,
    Detection,
    Detector,
    Embedder,
    HashEmbedder,
    PaletteCaptioner,
    PaletteDetector,
)
from .errors import BridgeError, NoObjectsDetected
from .nouns import OBJECT_NOUNS, STOP_NOUNS, noun_from_caption
from .rle import encode_mask

_SCHEMA = json.loads(
    resources.files("scene_bridge.data").joinpath("scene.schema.json").read_text())

DEFAULT_STATIONARY = frozenset({"basket", "tablet", "ipad"})


@dataclass(frozen=True)
class ExtractOptions:
    """Backend choices and scene-level defaults for one extraction."""

    detector: Detector = field(default_factory=PaletteDetector)
    captioner: Captioner = field(default_factory=PaletteCaptioner)
    embedder: Embedder = field(default_factory=HashEmbedder)
    feature_dim: int = 512
    crop_padding: float = 0.1  # fraction of bbox size added on each side
    edge_band_thickness: int = 6
    stationary_nouns: frozenset[str] = DEFAULT_STATIONARY
    noun_lexicon: frozenset[str] = OBJECT_NOUNS
    stop_nouns: frozenset[str] = STOP_NOUNS
    fx: float = 500.0
    fy: float = 500.0
    cx: float | None = None  # None: image center
    cy: float | None = None
    table_depth_m: float = 0.5


def _load_rgb(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def padded_crop(image: np.ndarray, detection: Detection,
                padding: float) -> np.ndarray:
    x, y, w, h = detection.bbox
    px = int(round(w * padding))
    py = int(round(h * padding))
    y0 = max(0, y - py)
    x0 = max(0, x - px)
    y1 = min(image.shape[0], y + h + py)
    x1 = min(image.shape[1], x + w + px)
    return image[y0:y1, x0:x1]


def _edge_band(width: int, height: int, thickness: int) -> np.ndarray:
    band = np.ones((height, width), dtype=bool)
    if thickness > 0 and 2 * thickness < min(width, height):
        band[thickness:-thickness, thickness:-thickness] = False
    return band


def extract_scene_document(image_path: str | Path,
                           options: ExtractOptions = ExtractOptions()) -> dict:
    """Detect, caption, and embed every object; return the scene JSON document.

    The class noun comes from the caption rather than the detector label:
    captions are far more reliable for naming tabletop objects than a
    detector's fixed class vocabulary.
    """
    image = _load_rgb(image_path)
    height, width = image.shape[:2]
    detections = options.detector.detect(image)
    if not detections:
        raise NoObjectsDetected(f"no objects found in {image_path}")

    objects = []
    noun_counts: dict[str, int] = {}
    for detection in detections:
        crop = padded_crop(image, detection, options.crop_padding)
        caption = options.captioner.caption(crop, detection)
        noun = noun_from_caption(caption, options.noun_lexicon, options.stop_nouns)
        feature = options.embedder.embed(crop, caption, options.feature_dim)
        norm = float(np.linalg.norm(feature))
        if abs(norm - 1.0) >= 1e-6:
            feature = np.asarray(feature, dtype=float) / norm
        index = noun_counts.get(noun, 0)
        noun_counts[noun] = index + 1
        objects.append({
            "id": f"{noun}-{index}",
            "caption": caption,
            "class_noun": noun,
            "movable": noun not in options.stationary_nouns,
            "mask": encode_mask(detection.mask),
            "feature": [float(v) for v in feature],
        })

    doc = {
        "image_width": int(width),
        "image_height": int(height),
        "camera": {
            "fx": options.fx,
            "fy": options.fy,
            "cx": width / 2.0 if options.cx is None else options.cx,
            "cy": height / 2.0 if options.cy is None else options.cy,
            "table_depth_m": options.table_depth_m,
        },
        "table_edge_band": encode_mask(
            _edge_band(width, height, options.edge_band_thickness)),
        "objects": objects,
    }
    jsonschema.validate(doc, _SCHEMA)
    return doc


def extract_scene(image_path: str | Path, out_path: str | Path,
                  options: ExtractOptions = ExtractOptions()) -> dict:
    """Extract and write the scene JSON file; returns the document."""
    doc = extract_scene_document(image_path, options)
    Path(out_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc
