"""Class-noun extraction from captions.

The exported class noun always comes from the caption, never from the
detector label: detectors constrained to a fixed training vocabulary
routinely mislabel tabletop objects, and the noun is what drives prompt
construction downstream.
"""
from __future__ import annotations

from .errors import BridgeError

STOP_NOUNS = frozenset({
    "table", "desk", "surface", "counter", "background", "top", "wall", "floor",
})

OBJECT_NOUNS = frozenset({
    "apple", "banana", "basket", "book", "bottle", "bowl", "box", "cup",
    "dish", "fork", "glass", "ipad", "jar", "keyboard", "knife", "laptop",
    "lemon", "mouse", "mug", "napkin", "notebook", "orange", "pan", "peach",
    "pear", "pen", "pencil", "phone", "plate", "pot", "remote", "scissors",
    "spoon", "tablet", "teapot", "toy", "tray", "vase",
})


def tokenize(caption: str) -> list[str]:
    out: list[str] = []
    word: list[str] = []
    for ch in caption.lower():
        if ch.isalpha():
            word.append(ch)
        elif word:
            out.append("".join(word))
            word = []
    if word:
        out.append("".join(word))
    return out


def noun_from_caption(caption: str,
                      lexicon: frozenset[str] = OBJECT_NOUNS,
                      stop_list: frozenset[str] = STOP_NOUNS) -> str:
    """First object noun in the caption that is not a background word."""
    for token in tokenize(caption):
        if token in lexicon and token not in stop_list:
            return token
    raise BridgeError(f"no object noun in caption {caption!r}")
