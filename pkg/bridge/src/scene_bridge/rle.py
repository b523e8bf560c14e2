"""Row-major run-length encoding matching the scene schema's mask format."""
from __future__ import annotations

import numpy as np


def encode_mask(array: np.ndarray) -> dict:
    """Boolean (H, W) array to {"width", "height", "runs": [[row, start, len]]}."""
    arr = np.asarray(array, dtype=bool)
    h, w = arr.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = arr
    diff = np.diff(padded, axis=1)
    start_r, start_c = np.nonzero(diff == 1)
    _, end_c = np.nonzero(diff == -1)
    runs = [[int(r), int(s), int(e - s)]
            for r, s, e in zip(start_r, start_c, end_c)]
    return {"width": int(w), "height": int(h), "runs": runs}


def decode_mask(doc: dict) -> np.ndarray:
    arr = np.zeros((doc["height"], doc["width"]), dtype=bool)
    for row, start, length in doc["runs"]:
        arr[row, start:start + length] = True
    return arr
