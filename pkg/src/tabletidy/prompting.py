"""Text prompt construction and inpainting-mask composition.

The prompt lists only object class nouns (no visual attributes) and ends with
a configurable suffix phrase. The inpainting mask marks the pixels the image
generator must preserve: the table edge band for visual grounding, the
contours of objects the robot may not move, minus an enlarged union of the
movable objects' masks so no shadows of the old arrangement survive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import EmptyList, NoNounFound
from .masks import BinaryMask, mask_contour, mask_dilate
from .scene import SceneDescription

DEFAULT_SUFFIX = "top-down"

# background words that must never become the prompt noun
STOP_NOUNS = frozenset({
    "table", "desk", "surface", "counter", "background", "top", "wall", "floor",
})

# concrete tabletop object nouns the default tagger recognizes
OBJECT_NOUNS = frozenset({
    "apple", "banana", "basket", "book", "bottle", "bowl", "box", "brush",
    "can", "candle", "cloth", "cup", "dish", "fork", "glass", "ipad", "jar",
    "keyboard", "knife", "laptop", "lemon", "mouse", "mug", "napkin",
    "notebook", "orange", "pan", "peach", "pear", "pen", "pencil", "phone",
    "plate", "pot", "remote", "scissors", "spoon", "tablet", "teapot", "toy",
    "tray", "vase",
})

COUNT_WORDS = {
    2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven",
    8: "eight", 9: "nine", 10: "ten",
}

IRREGULAR_PLURALS = {
    "knife": "knives", "mouse": "mice", "glass": "glasses", "dish": "dishes",
    "box": "boxes", "brush": "brushes", "peach": "peaches",
    "scissors": "scissors",
}

_VOWELS = "aeiou"


class NounTagger(Protocol):
    """Pluggable part-of-speech stand-in: picks the noun tokens of a caption."""

    def noun_tokens(self, tokens: Sequence[str]) -> list[str]:
        ...


class LexiconTagger:
    """Tags a token as a noun iff it appears in a fixed object lexicon."""

    def __init__(self, lexicon: frozenset[str] = OBJECT_NOUNS):
        self.lexicon = lexicon

    def noun_tokens(self, tokens: Sequence[str]) -> list[str]:
        return [t for t in tokens if t in self.lexicon]


def _tokenize(caption: str) -> list[str]:
    out: list[str] = []
    word = []
    for ch in caption.lower():
        if ch.isalpha():
            word.append(ch)
        elif word:
            out.append("".join(word))
            word = []
    if word:
        out.append("".join(word))
    return out


def extract_class_noun(caption: str, tagger: NounTagger | None = None,
                       stop_list: frozenset[str] = STOP_NOUNS) -> str:
    """First object noun of a caption that is not a background word.

    The default tagger is a fixed lexicon; callers with a real part-of-speech
    model plug it in through `tagger`.
    """
    if not caption.strip():
        raise NoNounFound("caption is empty")
    tokens = _tokenize(caption)
    tagger = tagger or LexiconTagger()
    for noun in tagger.noun_tokens(tokens):
        if noun not in stop_list:
            return noun
    raise NoNounFound(f"no object noun in caption {caption!r}")


@dataclass(frozen=True)
class Prompt:
    """Deterministic text prompt over an ordered list of class nouns."""

    text: str
    noun_list: tuple[str, ...]

    def to_json(self) -> dict:
        return {"text": self.text, "noun_list": list(self.noun_list)}

    @classmethod
    def from_json(cls, doc: dict) -> "Prompt":
        return cls(text=doc["text"], noun_list=tuple(doc["noun_list"]))


def _article(noun: str) -> str:
    return "an" if noun[:1] in _VOWELS else "a"


def _pluralize(noun: str) -> str:
    return IRREGULAR_PLURALS.get(noun, noun + "s")


def _noun_phrase(noun: str, count: int) -> str:
    if count == 1:
        return f"{_article(noun)} {noun}"
    word = COUNT_WORDS.get(count, str(count))
    return f"{word} {_pluralize(noun)}"


def build_prompt(nouns: Sequence[str], suffix: str = DEFAULT_SUFFIX) -> Prompt:
    """Join class nouns into the generation prompt.

    Duplicate nouns collapse into a counted plural ("two apples"); groups are
    joined with commas and a final "and"; the suffix phrase is appended after
    a comma.
    """
    if not nouns:
        raise EmptyList("prompt needs at least one noun")
    order: list[str] = []
    counts: dict[str, int] = {}
    for noun in nouns:
        if noun not in counts:
            order.append(noun)
        counts[noun] = counts.get(noun, 0) + 1
    phrases = [_noun_phrase(noun, counts[noun]) for noun in order]
    if len(phrases) == 1:
        body = phrases[0]
    elif len(phrases) == 2:
        body = f"{phrases[0]} and {phrases[1]}"
    else:
        body = ", ".join(phrases[:-1]) + f", and {phrases[-1]}"
    text = body[0].upper() + body[1:]
    if suffix:
        text = f"{text}, {suffix}"
    return Prompt(text=text, noun_list=tuple(nouns))


@dataclass(frozen=True)
class InpaintMask:
    """Pixels the image generator must preserve (foreground = keep)."""

    mask: BinaryMask

    @property
    def width(self) -> int:
        return self.mask.width

    @property
    def height(self) -> int:
        return self.mask.height

    def to_json(self) -> dict:
        return self.mask.to_json()

    @classmethod
    def from_json(cls, doc: dict) -> "InpaintMask":
        return cls(mask=BinaryMask.from_json(doc))


def compose_inpaint_mask(scene: SceneDescription, contour_thickness: float = 3,
                         dilation_radius: float = 7) -> InpaintMask:
    """Preserve-set for full-scene generation.

    preserve = (edge band | stationary-object contours) - dilated movable union.
    Contours keep only the rim of stationary objects so new objects can still
    be generated inside containers; the subtraction runs last because leftover
    shadows of movable objects would pin the generator to the old poses.
    """
    keep = scene.table_edge_band.array.copy()
    for obj in scene.stationary_objects:
        keep |= mask_contour(obj.mask, contour_thickness).array
    movable = np.zeros_like(keep)
    for obj in scene.movable_objects:
        movable |= obj.mask.array
    if movable.any():
        movable = mask_dilate(BinaryMask.from_array(movable), dilation_radius).array
        keep &= ~movable
    return InpaintMask(mask=BinaryMask.from_array(keep))


def compose_fixed_objects_mask(scene: SceneDescription) -> InpaintMask:
    """Preserve-set for missing-object completion: full fixed-object masks.

    Everything except the fixed (stationary) objects is left editable, so the
    generator may place the missing object anywhere around them.
    """
    keep = np.zeros((scene.image_height, scene.image_width), dtype=bool)
    for obj in scene.stationary_objects:
        keep |= obj.mask.array
    return InpaintMask(mask=BinaryMask.from_array(keep))


def scene_prompt(scene: SceneDescription, suffix: str = DEFAULT_SUFFIX) -> Prompt:
    """Prompt listing the movable objects' class nouns in scene order.

    Stationary objects stay out of the prompt: the inpainting mask already
    pins them, and the generator is asked only for the objects it may move.
    """
    nouns = [obj.class_noun for obj in scene.movable_objects]
    return build_prompt(nouns, suffix=suffix)
