"""Detection, captioning, and embedding backends.

The defaults are deterministic and offline: a palette-keyed color detector, a
template captioner, and a hash-seeded embedder. Model-backed equivalents
(Mask R-CNN detection, image-to-text captioning, CLIP embeddings) plug in
through the same protocols and raise ModelUnavailable when their packages or
weights cannot be loaded.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy import ndimage

from .errors import ModelUnavailable


@dataclass(frozen=True)
class Detection:
    """One detected object: full-frame boolean mask plus detector metadata."""

    mask: np.ndarray
    label: str
    score: float
    color_name: str = ""

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        ys, xs = np.nonzero(self.mask)
        return (int(xs.min()), int(ys.min()),
                int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


class Detector(Protocol):
    def detect(self, image: np.ndarray) -> list[Detection]:
        ...


class Captioner(Protocol):
    def caption(self, crop: np.ndarray, detection: Detection) -> str:
        ...


class Embedder(Protocol):
    def embed(self, crop: np.ndarray, caption: str, dim: int) -> np.ndarray:
        ...


@dataclass(frozen=True)
class TemplateCaption:
    """Palette entry: reference color, detector label, and caption template."""

    name: str
    rgb: tuple[int, int, int]
    detector_label: str
    caption: str


# reference colors used by the bundled sample photographs; the white entry
# deliberately carries a wrong detector label to mirror what fixed-vocabulary
# detectors do to plates
DEFAULT_PALETTE: tuple[TemplateCaption, ...] = (
    TemplateCaption("white", (235, 235, 235), "frisbee",
                    "a white plate on a wooden table"),
    TemplateCaption("silver", (176, 186, 201), "fork",
                    "a stainless steel fork on a wooden table"),
    TemplateCaption("slate", (88, 98, 114), "knife",
                    "a kitchen knife on a wooden table"),
    TemplateCaption("steel", (140, 156, 176), "spoon",
                    "a metal spoon on a wooden table"),
    TemplateCaption("charcoal", (44, 44, 56), "remote",
                    "a black keyboard on a desk"),
    TemplateCaption("green", (70, 160, 80), "mouse",
                    "a green computer mouse on a desk"),
    TemplateCaption("teal", (35, 140, 150), "cup",
                    "a teal coffee mug on a desk"),
    TemplateCaption("purple", (120, 70, 160), "tv",
                    "a tablet propped on a desk"),
    TemplateCaption("red", (204, 38, 38), "sports ball",
                    "a red apple on a wooden table"),
    TemplateCaption("lime", (120, 180, 50), "tennis ball",
                    "a green apple on a wooden table"),
    TemplateCaption("amber", (236, 152, 38), "orange",
                    "an orange on a wooden table"),
    TemplateCaption("umber", (96, 56, 24), "bowl",
                    "a wicker basket on a table"),
)


@dataclass(frozen=True)
class PaletteDetector:
    """Segments connected components of pixels nearest to known colors.

    A stand-in for instance segmentation that behaves deterministically on
    the bundled sample photographs: each pixel is assigned to its nearest
    palette color (if within ``tolerance``), and connected components above
    ``min_area`` become detections labeled with the palette's (possibly
    wrong) detector label. Nearest-entry assignment keeps shaded object
    interiors from bleeding into neighboring palette entries.
    """

    palette: tuple[TemplateCaption, ...] = DEFAULT_PALETTE
    tolerance: float = 50.0
    min_area: int = 60

    def detect(self, image: np.ndarray) -> list[Detection]:
        img = np.asarray(image, dtype=float)
        colors = np.array([entry.rgb for entry in self.palette], dtype=float)
        distances = np.sqrt(
            ((img[None, :, :, :] - colors[:, None, None, :]) ** 2).sum(axis=3))
        nearest = distances.argmin(axis=0)
        best = distances.min(axis=0)
        detections: list[Detection] = []
        for index, entry in enumerate(self.palette):
            near = (nearest == index) & (best < self.tolerance)
            if not near.any():
                continue
            labels, count = ndimage.label(near, structure=np.ones((3, 3)))
            for component in range(1, count + 1):
                mask = labels == component
                area = int(mask.sum())
                if area < self.min_area:
                    continue
                mask = ndimage.binary_fill_holes(mask)
                score = float(1.0 - best[mask].mean() / self.tolerance)
                detections.append(Detection(mask=mask, label=entry.detector_label,
                                            score=score, color_name=entry.name))
        # stable reading order: top-left corner of each bbox
        detections.sort(key=lambda d: (d.bbox[1], d.bbox[0], d.label))
        return detections


@dataclass(frozen=True)
class PaletteCaptioner:
    """Caption from the palette entry the detector matched."""

    palette: tuple[TemplateCaption, ...] = DEFAULT_PALETTE

    def caption(self, crop: np.ndarray, detection: Detection) -> str:
        for entry in self.palette:
            if entry.name == detection.color_name:
                return entry.caption
        return f"a {detection.label} on a table"


class HashEmbedder:
    """Deterministic unit embeddings: class-seeded base + instance jitter.

    The base direction comes from the caption's class noun, so two apples of
    different colors still land on nearly identical vectors while unrelated
    classes decorrelate; caption wording and crop statistics add a small
    instance-specific offset. That is the property the downstream matcher
    needs from a semantic embedding.
    """

    def __init__(self, jitter: float = 0.03):
        self.jitter = jitter

    @staticmethod
    def _seed(text: str) -> int:
        return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")

    def embed(self, crop: np.ndarray, caption: str, dim: int) -> np.ndarray:
        from .nouns import noun_from_caption
        from .errors import BridgeError

        try:
            anchor = noun_from_caption(caption)
        except BridgeError:
            anchor = caption
        base = np.random.default_rng(self._seed(anchor)).standard_normal(dim)
        stats = np.round(np.asarray(crop, dtype=float).mean(axis=(0, 1)))
        instance = f"{caption}|{stats.tolist()}"
        offset = np.random.default_rng(self._seed(instance)).standard_normal(dim)
        vector = base + self.jitter * offset
        return vector / np.linalg.norm(vector)


# --- model-backed backends (optional, require the `ml` extra) -----------------

class TorchvisionDetector:
    """Mask R-CNN instance segmentation via torchvision."""

    def __init__(self, score_threshold: float = 0.5, mask_threshold: float = 0.5):
        try:
            import torch  # noqa: F401
            from torchvision.models.detection import (
                MaskRCNN_ResNet50_FPN_Weights,
                maskrcnn_resnet50_fpn,
            )
        except Exception as err:  # missing package or weights download failure
            raise ModelUnavailable(f"torchvision Mask R-CNN unavailable: {err}") from err
        try:
            weights = MaskRCNN_ResNet50_FPN_Weights.DEFAULT
            self._categories = weights.meta["categories"]
            self._model = maskrcnn_resnet50_fpn(weights=weights).eval()
        except Exception as err:
            raise ModelUnavailable(f"Mask R-CNN weights unavailable: {err}") from err
        self.score_threshold = score_threshold
        self.mask_threshold = mask_threshold

    def detect(self, image: np.ndarray) -> list[Detection]:
        import torch

        tensor = torch.from_numpy(
            np.ascontiguousarray(image.transpose(2, 0, 1))).float() / 255.0
        with torch.no_grad():
            output = self._model([tensor])[0]
        detections = []
        for mask, label, score in zip(output["masks"], output["labels"],
                                      output["scores"]):
            if float(score) < self.score_threshold:
                continue
            binary = mask[0].numpy() > self.mask_threshold
            if not binary.any():
                continue
            detections.append(Detection(
                mask=binary, label=self._categories[int(label)],
                score=float(score)))
        detections.sort(key=lambda d: (d.bbox[1], d.bbox[0], d.label))
        return detections


class TransformersCaptioner:
    """Image-to-text captioning via a transformers pipeline."""

    def __init__(self, model: str = "Salesforce/blip-image-captioning-base"):
        try:
            from transformers import pipeline
            self._pipe = pipeline("image-to-text", model=model)
        except Exception as err:
            raise ModelUnavailable(f"captioning model unavailable: {err}") from err

    def caption(self, crop: np.ndarray, detection: Detection) -> str:
        from PIL import Image

        out = self._pipe(Image.fromarray(crop))
        return out[0]["generated_text"]


class ClipEmbedder:
    """CLIP visual embeddings via transformers."""

    def __init__(self, model: str = "openai/clip-vit-base-patch32"):
        try:
            from transformers import CLIPModel, CLIPProcessor
            self._model = CLIPModel.from_pretrained(model)
            self._processor = CLIPProcessor.from_pretrained(model)
        except Exception as err:
            raise ModelUnavailable(f"CLIP unavailable: {err}") from err

    def embed(self, crop: np.ndarray, caption: str, dim: int) -> np.ndarray:
        import torch
        from PIL import Image

        inputs = self._processor(images=Image.fromarray(crop), return_tensors="pt")
        with torch.no_grad():
            features = self._model.get_image_features(**inputs)[0].numpy()
        if len(features) != dim:
            raise ModelUnavailable(
                f"CLIP dimension {len(features)} != requested {dim}")
        return features / np.linalg.norm(features)
