"""HTTP goal provider speaking the POST /generate JSON protocol."""
from __future__ import annotations

import requests

from ..errors import MalformedCandidate, ProviderUnavailable, SceneValidationError
from ..scene import CandidateScene
from .base import GenerationRequest

DEFAULT_TIMEOUT = 30.0


class HttpProvider:
    """Client for a remote generator.

    Protocol: POST {base_url}/generate with the request JSON; the response is
    {"candidates": [candidate JSON, ...]}. Any non-200 status or transport
    failure maps to ProviderUnavailable; undecodable payloads map to
    MalformedCandidate. The remote decides how many candidates to return.
    """

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def __repr__(self):
        return f"HttpProvider({self.base_url!r})"

    def generate_batch(self, request: GenerationRequest) -> list[CandidateScene]:
        url = f"{self.base_url}/generate"
        try:
            response = requests.post(url, json=request.to_json(), timeout=self.timeout)
        except requests.RequestException as err:
            raise ProviderUnavailable(f"POST {url} failed: {err}") from err
        if response.status_code != 200:
            raise ProviderUnavailable(
                f"POST {url} returned {response.status_code}: {response.text[:200]}")
        try:
            payload = response.json()
        except ValueError as err:
            raise MalformedCandidate(f"{url}: response is not JSON") from err
        if not isinstance(payload, dict) or "candidates" not in payload:
            raise MalformedCandidate(f"{url}: response missing 'candidates'")
        out = []
        for i, doc in enumerate(payload["candidates"]):
            try:
                out.append(CandidateScene.from_json(doc, source_tag=f"{url}#{i}"))
            except SceneValidationError as err:
                raise MalformedCandidate(f"{url} candidate {i}: {err}") from err
        return out
