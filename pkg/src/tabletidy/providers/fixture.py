"""Fixture provider: candidate scenes read from *.candidate.json files."""
from __future__ import annotations

import json
import threading
from pathlib import Path

from ..errors import FixtureExhausted, MalformedCandidate, SceneValidationError
from ..scene import CandidateScene
from .base import GenerationRequest

CANDIDATE_SUFFIX = ".candidate.json"


class FixtureProvider:
    """Serves candidate files from a directory in filename order.

    Each batch consumes the next ``batch_size`` files; the final batch may be
    shorter so no fixture is wasted. Once all files are consumed the provider
    raises FixtureExhausted.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FileNotFoundError(f"fixture directory {self.directory} does not exist")
        self._paths = sorted(self.directory.glob(f"*{CANDIDATE_SUFFIX}"))
        self._cursor = 0
        self._lock = threading.Lock()

    def __repr__(self):
        return f"FixtureProvider({str(self.directory)!r})"

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self._paths) - self._cursor

    def generate_batch(self, request: GenerationRequest) -> list[CandidateScene]:
        with self._lock:
            if self._cursor >= len(self._paths):
                raise FixtureExhausted(
                    f"all {len(self._paths)} candidate files in {self.directory} consumed")
            chunk = self._paths[self._cursor:self._cursor + request.batch_size]
            self._cursor += len(chunk)
        out = []
        for path in chunk:
            try:
                doc = json.loads(path.read_text())
                out.append(CandidateScene.from_json(doc, source_tag=str(path)))
            except (json.JSONDecodeError, SceneValidationError) as err:
                raise MalformedCandidate(f"{path}: {err}") from err
        return out
