"""Provider protocol, batch requests, and the resample-until-valid loop."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..errors import MalformedCandidate, NoValidCandidate
from ..prompting import InpaintMask, Prompt
from ..scene import CandidateScene, SceneDescription

DEFAULT_BATCH_SIZE = 4
DEFAULT_MAX_BATCHES = 5

PROVIDER_URL_ENV = "TABLETIDY_PROVIDER_URL"


@dataclass(frozen=True)
class GenerationRequest:
    """One batched ask to the generative model."""

    prompt: Prompt
    inpaint: InpaintMask
    batch_size: int = DEFAULT_BATCH_SIZE
    seed: int | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def with_seed(self, seed: int | None) -> "GenerationRequest":
        return dataclasses.replace(self, seed=seed)

    def to_json(self) -> dict:
        return {
            "prompt": self.prompt.to_json(),
            "inpaint_mask": self.inpaint.to_json(),
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GenerationRequest":
        return cls(
            prompt=Prompt.from_json(doc["prompt"]),
            inpaint=InpaintMask.from_json(doc["inpaint_mask"]),
            batch_size=int(doc["batch_size"]),
            seed=None if doc.get("seed") is None else int(doc["seed"]),
        )


@runtime_checkable
class GoalProvider(Protocol):
    """Anything that can turn a generation request into candidate scenes."""

    def generate_batch(self, request: GenerationRequest) -> list[CandidateScene]:
        ...


def request_batch(provider: GoalProvider, request: GenerationRequest) -> list[CandidateScene]:
    """Ask the provider for one batch and re-validate every candidate.

    Candidates already went through schema checks at construction; this guards
    providers that hand back foreign objects.
    """
    batch = provider.generate_batch(request)
    for candidate in batch:
        if not isinstance(candidate, CandidateScene):
            raise MalformedCandidate(
                f"provider returned {type(candidate).__name__}, not a candidate scene")
    return list(batch)


def sample_until_valid(provider: GoalProvider, scene: SceneDescription,
                       request: GenerationRequest,
                       max_batches: int = DEFAULT_MAX_BATCHES) -> list[CandidateScene]:
    """Accumulate batches until at least one count-valid candidate appears.

    A candidate is count-valid when its movable-object count equals the
    scene's; stationary objects are pinned by the inpainting mask and are not
    counted. Each batch gets a derived seed (base + batch index) so that
    deterministic providers still produce fresh samples on a resample.
    """
    if max_batches < 1:
        raise ValueError("max_batches must be >= 1")
    target = len(scene.movable_objects)
    valid: list[CandidateScene] = []
    base_seed = request.seed
    for batch_index in range(max_batches):
        seed = None if base_seed is None else base_seed + batch_index
        batch = request_batch(provider, request.with_seed(seed))
        valid.extend(c for c in batch if len(c.movable_objects) == target)
        if valid:
            return valid
    raise NoValidCandidate(
        f"no candidate with {target} movable objects in {max_batches} batches")


def make_provider(spec: str, environ: dict | None = None) -> GoalProvider:
    """Build a provider from a CLI spec string.

    Accepted forms: ``fixture:DIR``, ``synthetic:NAME``, ``http:URL``. The
    TABLETIDY_PROVIDER_URL environment variable overrides the http endpoint.
    """
    from .fixture import FixtureProvider
    from .http_provider import HttpProvider
    from .synthetic import SyntheticProvider

    environ = os.environ if environ is None else environ
    kind, _, arg = spec.partition(":")
    if kind == "fixture":
        if not arg:
            raise ValueError("fixture provider needs a directory: fixture:DIR")
        return FixtureProvider(arg)
    if kind == "synthetic":
        return SyntheticProvider(arg or "place-setting")
    if kind == "http":
        # accept both "http:http://host:port" and a bare "http://host:port"
        url = environ.get(PROVIDER_URL_ENV) or (spec if arg.startswith("//") else arg)
        if not url:
            raise ValueError("http provider needs a URL: http:URL")
        return HttpProvider(url)
    raise ValueError(f"unknown provider spec {spec!r}")
