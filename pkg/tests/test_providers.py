import json

import numpy as np
import pytest

from tabletidy.errors import (
    FixtureExhausted,
    MalformedCandidate,
    NoValidCandidate,
    ProviderUnavailable,
)
from tabletidy.masks import BinaryMask
from tabletidy.prompting import InpaintMask, build_prompt
from tabletidy.providers import (
    FixtureProvider,
    GenerationRequest,
    HttpProvider,
    SyntheticProvider,
    make_provider,
    request_batch,
    sample_until_valid,
)
from tabletidy.providers.stub_server import serve
from tabletidy.scene import CameraModel, CandidateScene, SceneDescription, save_candidate
from tabletidy.shapes import make_object
from tabletidy.transforms import Pose2D

DIMS = 128


def make_request(nouns=("fork", "knife", "plate", "spoon"), batch_size=4, seed=7):
    return GenerationRequest(
        prompt=build_prompt(list(nouns)),
        inpaint=InpaintMask(mask=BinaryMask.empty(DIMS, DIMS)),
        batch_size=batch_size,
        seed=seed,
    )


def make_scene(nouns=("fork", "knife", "plate", "spoon")):
    rng = np.random.default_rng(0)
    objects = tuple(
        make_object(f"obj-{i}", noun, Pose2D(24 + 26 * i, 40 + 14 * i), DIMS, DIMS, rng)
        for i, noun in enumerate(nouns)
    )
    return SceneDescription(
        image_width=DIMS, image_height=DIMS, objects=objects,
        table_edge_band=BinaryMask.empty(DIMS, DIMS),
        camera=CameraModel(fx=200, fy=200, cx=DIMS / 2, cy=DIMS / 2, table_depth=0.5))


class CountScriptProvider:
    """Returns candidates with scripted movable-object counts per batch."""

    def __init__(self, batches):
        self.batches = list(batches)
        self.calls = 0

    def generate_batch(self, request):
        if self.calls >= len(self.batches):
            counts = self.batches[-1]
        else:
            counts = self.batches[self.calls]
        self.calls += 1
        rng = np.random.default_rng(self.calls)
        out = []
        for k, count in enumerate(counts):
            objects = tuple(
                make_object(f"g{k}-{i}", "mug", Pose2D(14 + 30 * i, 14 + 24 * k),
                            DIMS, DIMS, rng)
                for i in range(count)
            )
            out.append(CandidateScene(image_width=DIMS, image_height=DIMS,
                                      objects=objects,
                                      source_tag=f"script:{self.calls}:{k}"))
        return out


class TestSyntheticProvider:
    def test_batch_size_and_determinism(self):
        provider = SyntheticProvider("place-setting")
        request = make_request(seed=7)
        first = request_batch(provider, request)
        second = request_batch(provider, request)
        assert len(first) == 4
        assert first == second

    def test_different_seeds_differ(self):
        provider = SyntheticProvider("place-setting")
        a = provider.generate_batch(make_request(seed=1))
        b = provider.generate_batch(make_request(seed=2))
        assert a != b

    def test_objects_follow_prompt_nouns(self):
        provider = SyntheticProvider("place-setting")
        batch = provider.generate_batch(make_request(seed=3))
        assert [o.class_noun for o in batch[0].objects] == [
            "fork", "knife", "plate", "spoon"]

    def test_unknown_template_rejected(self):
        with pytest.raises(ValueError):
            SyntheticProvider("no-such-template")

    def test_all_templates_generate(self):
        for name in ("place-setting", "office", "fruit-circle"):
            provider = SyntheticProvider(name)
            batch = provider.generate_batch(make_request(("apple", "apple", "orange"), seed=4))
            assert len(batch) == 4
            assert all(len(c.objects) == 3 for c in batch)


class TestFixtureProvider:
    @pytest.fixture
    def fixture_dir(self, tmp_path):
        provider = SyntheticProvider("place-setting")
        batch = provider.generate_batch(make_request(seed=11))
        for i, cand in enumerate(batch):
            save_candidate(cand, tmp_path / f"{i:02d}.candidate.json")
        return tmp_path

    def test_filename_order_and_count(self, fixture_dir):
        provider = FixtureProvider(fixture_dir)
        batch = request_batch(provider, make_request(batch_size=4))
        assert len(batch) == 4
        tags = [c.source_tag for c in batch]
        assert tags == sorted(tags)

    def test_exhaustion(self, fixture_dir):
        provider = FixtureProvider(fixture_dir)
        request_batch(provider, make_request(batch_size=4))
        with pytest.raises(FixtureExhausted):
            request_batch(provider, make_request(batch_size=4))

    def test_partial_final_batch(self, fixture_dir):
        provider = FixtureProvider(fixture_dir)
        assert len(request_batch(provider, make_request(batch_size=3))) == 3
        assert len(request_batch(provider, make_request(batch_size=3))) == 1

    def test_malformed_file(self, tmp_path):
        (tmp_path / "00.candidate.json").write_text("{not json")
        provider = FixtureProvider(tmp_path)
        with pytest.raises(MalformedCandidate):
            request_batch(provider, make_request())

    def test_schema_violation(self, tmp_path):
        (tmp_path / "00.candidate.json").write_text(json.dumps({"image_width": 4}))
        provider = FixtureProvider(tmp_path)
        with pytest.raises(MalformedCandidate):
            request_batch(provider, make_request())


class TestSampleUntilValid:
    def test_single_batch_filter(self):
        provider = CountScriptProvider([[3, 4, 5, 4]])
        result = sample_until_valid(provider, make_scene(), make_request())
        assert len(result) == 2
        assert all(len(c.movable_objects) == 4 for c in result)
        assert provider.calls == 1

    def test_resamples_second_batch(self):
        provider = CountScriptProvider([[3, 5, 5, 2], [4, 3, 4, 4]])
        result = sample_until_valid(provider, make_scene(), make_request())
        assert len(result) == 3
        assert provider.calls == 2

    def test_exhausts_max_batches(self):
        provider = CountScriptProvider([[1, 2, 3, 5]])
        with pytest.raises(NoValidCandidate):
            sample_until_valid(provider, make_scene(), make_request(), max_batches=3)
        assert provider.calls == 3

    def test_derived_seeds_vary_batches(self):
        seen = []

        class Recorder:
            def generate_batch(self, request):
                seen.append(request.seed)
                return []

        with pytest.raises(NoValidCandidate):
            sample_until_valid(Recorder(), make_scene(), make_request(seed=10), max_batches=3)
        assert seen == [10, 11, 12]


class TestHttpProvider:
    def test_round_trip_through_stub(self):
        with serve(SyntheticProvider("place-setting")) as server:
            provider = HttpProvider(server.url)
            batch = request_batch(provider, make_request(seed=5))
            direct = SyntheticProvider("place-setting").generate_batch(make_request(seed=5))
            assert len(batch) == 4
            assert [o.class_noun for o in batch[0].objects] == [
                o.class_noun for o in direct[0].objects]
            assert [o.mask for o in batch[0].objects] == [o.mask for o in direct[0].objects]

    def test_unreachable_host(self):
        provider = HttpProvider("http://127.0.0.1:1", timeout=0.5)
        with pytest.raises(ProviderUnavailable):
            provider.generate_batch(make_request())

    def test_non_200_maps_to_unavailable(self):
        with serve(SyntheticProvider("place-setting")) as server:
            provider = HttpProvider(server.url + "/wrong-prefix")
            with pytest.raises(ProviderUnavailable):
                provider.generate_batch(make_request())


class TestMakeProvider:
    def test_specs(self, tmp_path):
        assert isinstance(make_provider("synthetic:office"), SyntheticProvider)
        assert isinstance(make_provider("synthetic:"), SyntheticProvider)
        assert isinstance(make_provider(f"fixture:{tmp_path}"), FixtureProvider)
        http = make_provider("http:http://example.test:9")
        assert isinstance(http, HttpProvider)
        assert http.base_url == "http://example.test:9"

    def test_env_override(self):
        provider = make_provider(
            "http:http://example.test:9",
            environ={"TABLETIDY_PROVIDER_URL": "http://other.test:7"})
        assert provider.base_url == "http://other.test:7"

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_provider("carrier-pigeon:coop")
