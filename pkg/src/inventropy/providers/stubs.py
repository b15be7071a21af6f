"""Deterministic offline providers used for tests and dry runs.

Generation stubs:
    CannedMapGenerator   answers from a fixed mapping (exact or substring match)
    RouletteGenerator    answers uniformly from a fixed list; the draw is a
                         pure function of (seed, prompt, replicate), so it is
                         reproducible and independent of call order
    EchoGenerator        returns the prompt itself

Embedding stubs:
    OrthogonalEmbedder   distinct texts get distinct one-hot axes, so any two
                         different texts have cosine affinity exactly 1/2
    HashSignEmbedder     sign patterns from a text hash; stable across runs
    BagOfWordsEmbedder   hashed token counts; similarity reflects word overlap
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import EmptyTextError, InvalidInputError, ProviderConfigError
from .base import stable_u64


class CannedMapGenerator:
    def __init__(self, mapping: dict[str, str], match: str = "exact", default: str | None = None):
        if match not in ("exact", "contains"):
            raise ProviderConfigError("match must be 'exact' or 'contains'")
        self.mapping = dict(mapping)
        self.match = match
        self.default = default
        self.call_count = 0

    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        self.call_count += 1
        if self.match == "exact":
            hit = self.mapping.get(prompt)
        else:
            hit = None
            for key in sorted(self.mapping, key=lambda k: (-len(k), k)):
                if key in prompt:
                    hit = self.mapping[key]
                    break
        if hit is None:
            if self.default is None:
                raise ProviderConfigError(f"no canned answer matches prompt {prompt!r}")
            hit = self.default
        return hit


class RouletteGenerator:
    def __init__(self, answers: Sequence[str], seed: int = 0):
        if not answers:
            raise ProviderConfigError("roulette stub needs at least one answer")
        self.answers = list(answers)
        self.seed = seed
        self.call_count = 0

    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        self.call_count += 1
        draw = stable_u64("roulette", self.seed, prompt, replicate)
        return self.answers[draw % len(self.answers)]


class EchoGenerator:
    def __init__(self):
        self.call_count = 0

    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        self.call_count += 1
        return prompt


class RecordingGenerator:
    """Wraps a provider, recording every request for audits."""

    def __init__(self, inner):
        self.inner = inner
        self.requests: list[dict] = []

    @property
    def call_count(self) -> int:
        return len(self.requests)

    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        self.requests.append(
            {"prompt": prompt, "temperature": temperature, "replicate": replicate}
        )
        return self.inner.complete(prompt, temperature=temperature, replicate=replicate)


class OrthogonalEmbedder:
    """First-seen texts are assigned consecutive one-hot axes.

    Identical texts map to identical vectors and different texts to exactly
    orthogonal ones, which makes affinity matrices exactly equi-similar --
    the cleanest geometry for end-to-end determinism checks.  Assignment is
    first-seen, so it is reproducible whenever texts arrive in the same
    order.
    """

    def __init__(self, dimension: int = 4096):
        if dimension < 1:
            raise ProviderConfigError("dimension must be >= 1")
        self.dimension = dimension
        self._axes: dict[str, int] = {}

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            if not text:
                raise EmptyTextError("cannot embed an empty string")
            axis = self._axes.get(text)
            if axis is None:
                axis = len(self._axes)
                if axis >= self.dimension:
                    raise InvalidInputError(
                        f"orthogonal embedder exhausted its {self.dimension} axes"
                    )
                self._axes[text] = axis
            out[row, axis] = 1.0
        return out


class HashSignEmbedder:
    """Unit vectors of +-1 signs drawn from a hash of the text.

    Unlike the orthogonal stub this is stable across processes and call
    orders; distinct texts land nearly, not exactly, orthogonal.
    """

    def __init__(self, dimension: int = 64, seed: int = 0):
        if dimension < 1:
            raise ProviderConfigError("dimension must be >= 1")
        self.dimension = dimension
        self.seed = seed

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension))
        for row, text in enumerate(texts):
            if not text:
                raise EmptyTextError("cannot embed an empty string")
            rng = np.random.default_rng(stable_u64("hash-embed", self.seed, text))
            signs = rng.integers(0, 2, size=self.dimension) * 2 - 1
            out[row] = signs / np.sqrt(self.dimension)
        return out


class BagOfWordsEmbedder:
    """Hashed token-count vectors; cosine reflects lexical overlap.

    Useful as a perturbation-fitness embedder: a variant sharing most words
    with the original scores close to 1, a heavily edited one drifts down.
    """

    def __init__(self, dimension: int = 512):
        if dimension < 1:
            raise ProviderConfigError("dimension must be >= 1")
        self.dimension = dimension

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            tokens = text.split()
            if not tokens:
                raise EmptyTextError("cannot embed an empty string")
            for token in tokens:
                out[row, stable_u64("bow", token.lower()) % self.dimension] += 1.0
        return out


class StubJudge:
    """Generation stub that always replies with a fixed judgement."""

    def __init__(self, reply: str = "Yes"):
        self.reply = reply
        self.call_count = 0

    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        self.call_count += 1
        return self.reply
