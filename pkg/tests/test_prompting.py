import numpy as np
import pytest

from tabletidy.errors import EmptyList, NoNounFound
from tabletidy.masks import BinaryMask
from tabletidy.prompting import (
    InpaintMask,
    build_prompt,
    compose_fixed_objects_mask,
    compose_inpaint_mask,
    extract_class_noun,
    scene_prompt,
)
from tabletidy.scene import CameraModel, ObjectInstance, SceneDescription


class TestExtractClassNoun:
    def test_paper_example(self):
        assert extract_class_noun("a red apple on a wooden table") == "apple"

    def test_bare_noun(self):
        assert extract_class_noun("plate") == "plate"

    def test_first_non_stoplist_noun(self):
        assert extract_class_noun("a stainless steel fork next to a plate") == "fork"

    def test_background_only_raises(self):
        with pytest.raises(NoNounFound):
            extract_class_noun("a wooden table top")

    def test_empty_caption_raises(self):
        with pytest.raises(NoNounFound):
            extract_class_noun("   ")

    def test_custom_tagger(self):
        class EverythingIsANoun:
            def noun_tokens(self, tokens):
                return list(tokens)

        assert extract_class_noun("zorbly widget", tagger=EverythingIsANoun()) == "zorbly"


class TestBuildPrompt:
    def test_place_setting(self):
        prompt = build_prompt(["fork", "knife", "plate", "spoon"])
        assert prompt.text == "A fork, a knife, a plate, and a spoon, top-down"

    def test_single_item(self):
        assert build_prompt(["mug"]).text == "A mug, top-down"

    def test_duplicate_collapse_and_pair_join(self):
        prompt = build_prompt(["apple", "apple", "orange"])
        assert prompt.text == "Two apples and an orange, top-down"

    def test_vowel_article(self):
        assert build_prompt(["orange"]).text == "An orange, top-down"

    def test_irregular_plural(self):
        assert build_prompt(["knife", "knife"]).text == "Two knives, top-down"

    def test_custom_suffix(self):
        assert build_prompt(["mug"], suffix="overhead view").text == "A mug, overhead view"

    def test_noun_list_preserved(self):
        prompt = build_prompt(["apple", "apple", "orange"])
        assert prompt.noun_list == ("apple", "apple", "orange")

    def test_empty_raises(self):
        with pytest.raises(EmptyList):
            build_prompt([])

    def test_deterministic(self):
        nouns = ["fork", "knife", "plate", "spoon"]
        assert build_prompt(nouns) == build_prompt(nouns)

    def test_injective_up_to_multiset_and_order(self):
        from collections import Counter

        def signature(nouns):
            order = list(dict.fromkeys(nouns))
            return (tuple(order), tuple(sorted(Counter(nouns).items())))

        lists = [
            ["fork"], ["fork", "fork"], ["fork", "knife"], ["knife", "fork"],
            ["fork", "knife", "plate"], ["apple", "apple", "orange"],
            ["apple", "orange", "apple"], ["apple", "orange"], ["orange"],
            ["mug"], ["mug", "mug", "mug"],
        ]
        for a in lists:
            for b in lists:
                same_text = build_prompt(a).text == build_prompt(b).text
                assert same_text == (signature(a) == signature(b)), (a, b)


def unit_feature(dim=4, axis=0):
    v = [0.0] * dim
    v[axis] = 1.0
    return tuple(v)


def mask_from_pixels(pixels, width, height):
    arr = np.zeros((height, width), dtype=bool)
    for x, y in pixels:
        arr[y, x] = True
    return BinaryMask.from_array(arr)


def make_scene(objects, width=8, height=8, band_pixels=()):
    return SceneDescription(
        image_width=width,
        image_height=height,
        objects=tuple(objects),
        table_edge_band=mask_from_pixels(band_pixels, width, height)
        if band_pixels else BinaryMask.empty(width, height),
        camera=CameraModel(fx=100, fy=100, cx=width / 2, cy=height / 2, table_depth=0.5),
    )


def border_pixels(width, height):
    return [(x, y) for x in range(width) for y in range(height)
            if x in (0, width - 1) or y in (0, height - 1)]


def make_object(object_id, pixels, movable, width=8, height=8, noun="plate"):
    return ObjectInstance(
        id=object_id,
        mask=mask_from_pixels(pixels, width, height),
        caption=f"a {noun} on a table",
        class_noun=noun,
        feature=unit_feature(),
        movable=movable,
    )


class TestComposeInpaintMask:
    def test_empty_scene_gives_empty_preserve_set(self):
        scene = make_scene([make_object("m0", [(4, 4)], movable=True)])
        out = compose_inpaint_mask(scene, contour_thickness=1, dilation_radius=1)
        assert out.mask.is_empty

    def test_border_band_and_stationary_ring(self):
        square = [(x, y) for x in range(3, 6) for y in range(3, 6)]
        scene = make_scene(
            [make_object("s0", square, movable=False)],
            band_pixels=border_pixels(8, 8),
        )
        out = compose_inpaint_mask(scene, contour_thickness=1, dilation_radius=1)
        expected = np.zeros((8, 8), dtype=bool)
        for x, y in border_pixels(8, 8):
            expected[y, x] = True
        for x, y in square:
            expected[y, x] = True
        expected[4, 4] = False  # interior of the 3x3 square stays editable
        assert np.array_equal(out.mask.array, expected)

    def test_movable_subtraction_wins(self):
        square = [(x, y) for x in range(3, 6) for y in range(3, 6)]
        scene = make_scene(
            [
                make_object("s0", square, movable=False),
                make_object("m0", [(0, 3)], movable=True),
            ],
            band_pixels=border_pixels(8, 8),
        )
        out = compose_inpaint_mask(scene, contour_thickness=1, dilation_radius=1)
        expected = np.zeros((8, 8), dtype=bool)
        for x, y in border_pixels(8, 8):
            expected[y, x] = True
        for x, y in square:
            expected[y, x] = True
        expected[4, 4] = False
        # plus-neighborhood of the movable pixel at (0, 3) is removed
        for x, y in [(0, 3), (1, 3), (0, 2), (0, 4)]:
            expected[y, x] = False
        assert np.array_equal(out.mask.array, expected)

    def test_preserve_never_meets_dilated_movables(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            objs = []
            for i in range(int(rng.integers(1, 4))):
                pix = [(int(rng.integers(0, 8)), int(rng.integers(0, 8)))]
                objs.append(make_object(f"o{i}", pix, movable=bool(rng.integers(0, 2))))
            if not any(o.movable for o in objs):
                objs[0] = make_object("o0", [(1, 1)], movable=True)
            scene = make_scene(objs, band_pixels=border_pixels(8, 8))
            out = compose_inpaint_mask(scene, contour_thickness=2, dilation_radius=2)
            movable = np.zeros((8, 8), dtype=bool)
            for o in scene.movable_objects:
                movable |= o.mask.array
            from tabletidy.masks import mask_dilate
            dilated = mask_dilate(BinaryMask.from_array(movable), 2).array
            assert not np.any(out.mask.array & dilated)

    def test_adding_stationary_object_never_shrinks_preserve_set(self):
        base_objs = [make_object("m0", [(2, 2)], movable=True)]
        scene_a = make_scene(base_objs, band_pixels=border_pixels(8, 8))
        scene_b = make_scene(
            base_objs + [make_object("s1", [(5, 5), (6, 5)], movable=False)],
            band_pixels=border_pixels(8, 8),
        )
        out_a = compose_inpaint_mask(scene_a, 1, 1).mask.array
        out_b = compose_inpaint_mask(scene_b, 1, 1).mask.array
        assert not np.any(out_a & ~out_b)

    def test_json_round_trip(self):
        scene = make_scene(
            [make_object("s0", [(3, 3)], movable=False)],
            band_pixels=border_pixels(8, 8),
        )
        out = compose_inpaint_mask(scene)
        assert InpaintMask.from_json(out.to_json()) == out


def test_fixed_objects_mask_keeps_full_masks():
    square = [(x, y) for x in range(3, 6) for y in range(3, 6)]
    scene = make_scene(
        [
            make_object("s0", square, movable=False),
            make_object("m0", [(1, 1)], movable=True),
        ],
        band_pixels=border_pixels(8, 8),
    )
    out = compose_fixed_objects_mask(scene)
    expected = np.zeros((8, 8), dtype=bool)
    for x, y in square:
        expected[y, x] = True
    assert np.array_equal(out.mask.array, expected)


def test_scene_prompt_uses_movable_nouns_in_order():
    scene = make_scene([
        make_object("a", [(1, 1)], movable=True, noun="fork"),
        make_object("b", [(3, 3)], movable=False, noun="basket"),
        make_object("c", [(5, 5)], movable=True, noun="plate"),
    ])
    assert scene_prompt(scene).text == "A fork and a plate, top-down"
