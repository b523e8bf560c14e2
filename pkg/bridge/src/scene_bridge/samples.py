"""Deterministic sample photographs for the bridge's tests and docs.

These are synthetic tabletop photos: a noisy wood-grain background with
shaded, noisy objects in the default palette colors. Regenerate with
``python -m scene_bridge.samples OUTDIR``.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from PIL import Image

WOOD = np.array([150, 112, 74], dtype=float)
SIZE = 320


def _wood_background(rng: np.random.Generator, size: int = SIZE) -> np.ndarray:
    img = np.ones((size, size, 3), dtype=float) * WOOD
    grain = 8.0 * np.sin(np.linspace(0, 40 * np.pi, size))[None, :, None]
    img += grain
    img += rng.normal(0, 5.0, (size, size, 3))
    return img


def _shade(rng, img, mask, rgb):
    ys, xs = np.nonzero(mask)
    cy, cx = ys.mean(), xs.mean()
    radius = max(1.0, np.hypot(ys - cy, xs - cx).max())
    falloff = 1.0 - 0.06 * (np.hypot(ys - cy, xs - cx) / radius) ** 2
    color = np.array(rgb, dtype=float)
    img[ys, xs] = color[None, :] * falloff[:, None]
    img[ys, xs] += rng.normal(0, 3.0, (len(ys), 3))


def _disk(size, cx, cy, r):
    ys, xs = np.ogrid[:size, :size]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _rect(size, x0, y0, w, h):
    mask = np.zeros((size, size), dtype=bool)
    mask[y0:y0 + h, x0:x0 + w] = True
    return mask


def _ellipse(size, cx, cy, rx, ry):
    ys, xs = np.ogrid[:size, :size]
    return ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0


def dining_photo(seed: int = 11) -> np.ndarray:
    rng = np.random.default_rng(seed)
    img = _wood_background(rng)
    _shade(rng, img, _disk(SIZE, 150, 160, 46), (235, 235, 235))       # plate
    fork = _rect(SIZE, 62, 110, 10, 86) | _rect(SIZE, 56, 102, 22, 18)
    _shade(rng, img, fork, (176, 186, 201))                            # fork
    _shade(rng, img, _rect(SIZE, 230, 104, 9, 92), (88, 98, 114))      # knife
    spoon = _rect(SIZE, 266, 120, 8, 70) | _ellipse(SIZE, 270, 110, 9, 13)
    _shade(rng, img, spoon, (140, 156, 176))                           # spoon
    return np.clip(img, 0, 255).astype(np.uint8)


def office_photo(seed: int = 12) -> np.ndarray:
    rng = np.random.default_rng(seed)
    img = _wood_background(rng)
    _shade(rng, img, _rect(SIZE, 80, 200, 130, 44), (44, 44, 56))      # keyboard
    _shade(rng, img, _ellipse(SIZE, 250, 222, 13, 19), (70, 160, 80))  # mouse
    mug = _disk(SIZE, 60, 120, 18) | _rect(SIZE, 76, 112, 12, 10)
    _shade(rng, img, mug, (35, 140, 150))                              # mug
    _shade(rng, img, _rect(SIZE, 120, 60, 70, 50), (120, 70, 160))     # tablet
    return np.clip(img, 0, 255).astype(np.uint8)


def fruit_photo(seed: int = 13) -> np.ndarray:
    rng = np.random.default_rng(seed)
    img = _wood_background(rng)
    basket = _disk(SIZE, 110, 110, 52) & ~_disk(SIZE, 110, 110, 41)
    _shade(rng, img, basket, (96, 56, 24))                             # basket rim
    _shade(rng, img, _disk(SIZE, 232, 90, 17), (204, 38, 38))          # red apple
    _shade(rng, img, _disk(SIZE, 258, 180, 16), (120, 180, 50))        # green apple
    _shade(rng, img, _disk(SIZE, 170, 250, 15), (236, 152, 38))        # orange
    return np.clip(img, 0, 255).astype(np.uint8)


def blank_photo(seed: int = 14) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.clip(_wood_background(rng), 0, 255).astype(np.uint8)


SAMPLES = {
    "dining_photo.png": dining_photo,
    "office_photo.png": office_photo,
    "fruit_photo.png": fruit_photo,
    "blank_photo.png": blank_photo,
}


def write_samples(out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in SAMPLES.items():
        path = out / name
        Image.fromarray(builder()).save(path)
        written.append(path)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    for path in write_samples(target):
        print(path)
