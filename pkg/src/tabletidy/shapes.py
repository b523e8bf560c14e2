"""Canonical object shapes and deterministic pseudo-embeddings.

These back the synthetic goal provider and the bundled fixture scenes: every
class noun gets a fixed binary shape and a reproducible unit feature vector,
so scenes and generated candidates share a closed-loop vocabulary without any
model inference.
"""
from __future__ import annotations

import hashlib
from functools import lru_cache

import numpy as np

from .masks import BinaryMask, posed_mask
from .scene import DEFAULT_FEATURE_DIM, ObjectInstance
from .transforms import Pose2D


def _paint(width: int, height: int) -> np.ndarray:
    return np.zeros((height, width), dtype=bool)


def _disk(arr: np.ndarray, cx: float, cy: float, r: float) -> None:
    h, w = arr.shape
    ys, xs = np.ogrid[:h, :w]
    arr |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _ellipse(arr: np.ndarray, cx: float, cy: float, rx: float, ry: float) -> None:
    h, w = arr.shape
    ys, xs = np.ogrid[:h, :w]
    arr |= ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0


def _rect(arr: np.ndarray, x0: int, y0: int, w: int, h: int) -> None:
    arr[y0:y0 + h, x0:x0 + w] = True


def _plate() -> np.ndarray:
    arr = _paint(54, 54)
    _disk(arr, 26.5, 26.5, 26)
    return arr


def _fork() -> np.ndarray:
    # 4 tines over a head, narrow handle below; long axis vertical
    arr = _paint(13, 40)
    for i in range(4):
        _rect(arr, 1 + 3 * i, 0, 2, 9)
    _rect(arr, 1, 9, 11, 5)
    _rect(arr, 5, 14, 3, 26)
    return arr


def _knife() -> np.ndarray:
    # blade wider than the handle makes the shape 180-degree asymmetric
    arr = _paint(9, 40)
    _rect(arr, 1, 0, 7, 18)
    _rect(arr, 3, 18, 3, 22)
    return arr


def _spoon() -> np.ndarray:
    arr = _paint(13, 40)
    _ellipse(arr, 6, 7, 5.5, 7)
    _rect(arr, 5, 14, 3, 26)
    return arr


def _mug() -> np.ndarray:
    arr = _paint(34, 28)
    _disk(arr, 13.5, 13.5, 12)
    _rect(arr, 25, 10, 8, 7)  # handle
    return arr


def _keyboard() -> np.ndarray:
    arr = _paint(46, 18)
    _rect(arr, 0, 0, 46, 16)
    _rect(arr, 18, 16, 10, 2)  # cable stub breaks the 180-degree symmetry
    return arr


def _mouse() -> np.ndarray:
    arr = _paint(14, 20)
    _ellipse(arr, 6.5, 10, 6, 9)
    arr[0:3, 5:9] = True  # cable stub
    return arr


def _tablet() -> np.ndarray:
    arr = _paint(30, 40)
    _rect(arr, 0, 0, 30, 40)
    return arr


def _apple() -> np.ndarray:
    arr = _paint(24, 24)
    _disk(arr, 11.5, 12.5, 10.5)
    _rect(arr, 10, 0, 3, 4)  # stem
    return arr


def _orange() -> np.ndarray:
    arr = _paint(22, 22)
    _disk(arr, 10.5, 10.5, 10)
    return arr


def _basket() -> np.ndarray:
    arr = _paint(76, 76)
    _disk(arr, 37.5, 37.5, 37)
    inner = _paint(76, 76)
    _disk(inner, 37.5, 37.5, 30)
    return arr & ~inner


def _bowl() -> np.ndarray:
    arr = _paint(40, 40)
    _disk(arr, 19.5, 19.5, 19)
    inner = _paint(40, 40)
    _disk(inner, 19.5, 19.5, 13)
    return arr & ~inner


def _pen() -> np.ndarray:
    arr = _paint(5, 30)
    _rect(arr, 1, 0, 3, 27)
    _rect(arr, 2, 27, 1, 3)  # tip
    return arr


def _notebook() -> np.ndarray:
    arr = _paint(28, 38)
    _rect(arr, 0, 0, 28, 38)
    arr[:, 0:2] = False  # spine notch
    arr[0:2, 0:6] = True
    return arr


_SHAPE_BUILDERS = {
    "plate": _plate,
    "fork": _fork,
    "knife": _knife,
    "spoon": _spoon,
    "mug": _mug,
    "cup": _mug,
    "keyboard": _keyboard,
    "mouse": _mouse,
    "tablet": _tablet,
    "ipad": _tablet,
    "apple": _apple,
    "orange": _orange,
    "basket": _basket,
    "bowl": _bowl,
    "pen": _pen,
    "notebook": _notebook,
}


def known_shapes() -> tuple[str, ...]:
    return tuple(sorted(_SHAPE_BUILDERS))


@lru_cache(maxsize=None)
def shape_for_noun(noun: str) -> BinaryMask:
    """Canonical binary shape for a class noun (generic blob if unknown)."""
    builder = _SHAPE_BUILDERS.get(noun)
    if builder is None:
        arr = _paint(18, 24)
        _ellipse(arr, 8.5, 11.5, 8, 11)
        return BinaryMask.from_array(arr)
    return BinaryMask.from_array(builder())


def _seed_from_text(text: str) -> int:
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def feature_for_noun(noun: str, dim: int = DEFAULT_FEATURE_DIM) -> np.ndarray:
    """Reproducible unit feature for a class noun; distinct nouns decorrelate.

    The construction (gaussian draw seeded by the first eight bytes of the
    noun's sha256, normalized) is a wire-level convention: external tools
    that produce scene files derive features the same way so that their
    objects land in the same embedding space as generated candidates.
    """
    rng = np.random.default_rng(_seed_from_text(noun))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def instance_feature(noun: str, rng: np.random.Generator,
                     dim: int = DEFAULT_FEATURE_DIM, jitter: float = 0.05) -> tuple[float, ...]:
    """Per-instance feature: the class feature plus a small random offset."""
    v = feature_for_noun(noun, dim) + jitter * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def make_object(object_id: str, noun: str, pose: Pose2D, width: int, height: int,
                rng: np.random.Generator, movable: bool = True,
                caption: str | None = None,
                feature_dim: int = DEFAULT_FEATURE_DIM) -> ObjectInstance:
    """Rasterize a class-noun shape at a pose into a full-canvas object."""
    mask = posed_mask(shape_for_noun(noun), pose, width, height)
    return ObjectInstance(
        id=object_id,
        mask=mask,
        caption=caption or f"a {noun} on a table",
        class_noun=noun,
        feature=instance_feature(noun, rng, dim=feature_dim),
        movable=movable,
    )
