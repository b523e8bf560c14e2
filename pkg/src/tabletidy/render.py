"""Byte-deterministic P6 portable-pixmap rendering of layouts."""
from __future__ import annotations

import colorsys
import hashlib
from pathlib import Path

import numpy as np

from .errors import IoFailure
from .layout import Layout, anchor_index

BACKGROUND = (34, 34, 40)
MARKER_COLOR = (250, 250, 250)
ANCHOR_COLOR = (255, 210, 60)


def color_for_id(object_id: str) -> tuple[int, int, int]:
    """Stable, saturated color derived from the object id."""
    digest = hashlib.sha256(object_id.encode()).digest()
    hue = digest[0] / 255.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.9)
    return (int(r * 255), int(g * 255), int(b * 255))


def _draw_cross(canvas: np.ndarray, x: float, y: float, color, arm: int = 2) -> None:
    h, w, _ = canvas.shape
    cx, cy = int(round(x)), int(round(y))
    for d in range(-arm, arm + 1):
        if 0 <= cx + d < w and 0 <= cy < h:
            canvas[cy, cx + d] = color
        if 0 <= cx < w and 0 <= cy + d < h:
            canvas[cy + d, cx] = color


def render_layout(layout: Layout, path: str | Path,
                  markers: bool = False) -> bytes:
    """Rasterize a layout to a P6 pixmap: one flat color per object id.

    With ``markers`` enabled, centroids get a small cross and the anchor a
    larger one; markers overdraw object pixels, so leave them off when exact
    per-object pixel counts matter.
    """
    bx, by, bw, bh = layout.bounds
    width, height = int(round(bw)), int(round(bh))
    canvas = np.empty((height, width, 3), dtype=np.uint8)
    canvas[:, :] = BACKGROUND
    for entry in layout.entries:
        pts = entry.footprint()
        keep = ((pts[:, 0] >= bx) & (pts[:, 0] < bx + width)
                & (pts[:, 1] >= by) & (pts[:, 1] < by + height))
        pts = pts[keep]
        xs = (pts[:, 0] - int(bx)).astype(np.int64)
        ys = (pts[:, 1] - int(by)).astype(np.int64)
        canvas[ys, xs] = color_for_id(entry.object_id)
    if markers and layout.entries:
        anchor = anchor_index(layout)
        for i, entry in enumerate(layout.entries):
            color = ANCHOR_COLOR if i == anchor else MARKER_COLOR
            arm = 4 if i == anchor else 2
            _draw_cross(canvas, entry.pose.centroid_x - bx,
                        entry.pose.centroid_y - by, color, arm)
    header = f"P6\n{width} {height}\n255\n".encode()
    payload = header + canvas.tobytes()
    try:
        Path(path).write_bytes(payload)
    except OSError as err:
        raise IoFailure(f"cannot write render to {path}: {err}") from err
    return payload
