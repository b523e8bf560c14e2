"""Goal-image providers: sampling candidate arrangements from a generator."""

from .base import (
    GenerationRequest,
    GoalProvider,
    make_provider,
    request_batch,
    sample_until_valid,
)
from .fixture import FixtureProvider
from .synthetic import SyntheticProvider
from .http_provider import HttpProvider

__all__ = [
    "FixtureProvider",
    "GenerationRequest",
    "GoalProvider",
    "HttpProvider",
    "SyntheticProvider",
    "make_provider",
    "request_batch",
    "sample_until_valid",
]
