"""Extraction bridge: RGB photographs to object-level scene JSON.

Detection, captioning, and embedding are pluggable backends; the defaults are
deterministic classical-vision stand-ins so the bridge works offline, and
model-backed implementations can be swapped in through ``ExtractOptions``.
The output file format is the rearrangement pipeline's published scene
schema; that file contract is the only coupling between the two packages.
"""

from .backends import (
    Captioner,
    Detection,
    Detector,
    Embedder,
    HashEmbedder,
    PaletteCaptioner,
    PaletteDetector,
    TemplateCaption,
)
from .errors import BridgeError, ModelUnavailable, NoObjectsDetected
from .extract import ExtractOptions, extract_scene, extract_scene_document

__all__ = [
    "BridgeError",
    "Captioner",
    "Detection",
    "Detector",
    "Embedder",
    "ExtractOptions",
    "HashEmbedder",
    "ModelUnavailable",
    "NoObjectsDetected",
    "PaletteCaptioner",
    "PaletteDetector",
    "TemplateCaption",
    "extract_scene",
    "extract_scene_document",
]

__version__ = "0.1.0"
