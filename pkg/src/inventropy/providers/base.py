"""Provider protocols plus the retrying, cache-aware generation/embedding ops."""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..errors import (
    EmptyTextError,
    ProviderConfigError,
    ProviderContractError,
    ProviderUnavailableError,
)

logger = logging.getLogger(__name__)


@runtime_checkable
class GenerationProvider(Protocol):
    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str: ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def stable_u64(*parts) -> int:
    """64-bit integer derived from a SHA-256 of the joined parts.

    Used wherever a seed must be a pure function of identifiers, so results
    never depend on Python's per-process hash randomisation.
    """
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


@dataclass(frozen=True)
class GenerationRequest:
    model: str
    prompt: str
    temperature: float
    replicate: int
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.temperature) or self.temperature < 0.0:
            raise ProviderConfigError("temperature must be finite and >= 0")
        if self.replicate < 0:
            raise ProviderConfigError("replicate index must be >= 0")

    def fingerprint(self) -> str:
        blob = "\x1f".join(
            [self.model, self.prompt, repr(self.temperature), str(self.replicate), str(self.seed)]
        ).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def with_backoff(fn, retries: int = 3, base_delay: float = 0.5):
    """Run ``fn`` retrying transient provider failures with exponential backoff."""
    attempt = 0
    while True:
        try:
            return fn()
        except ProviderUnavailableError:
            attempt += 1
            if attempt > retries:
                raise
            delay = base_delay * (2 ** (attempt - 1))
            logger.warning("transient provider failure; retry %d in %.1fs", attempt, delay)
            if delay > 0:
                time.sleep(delay)


def generate(
    request: GenerationRequest,
    provider: GenerationProvider,
    retries: int = 3,
    cache=None,
    base_delay: float = 0.5,
) -> str:
    """Complete one request, consulting the cache before touching the provider."""
    if cache is not None:
        hit = cache.get_generation(request.fingerprint())
        if hit is not None:
            return hit.raw

    def call():
        return provider.complete(
            request.prompt, temperature=request.temperature, replicate=request.replicate
        )

    try:
        raw = with_backoff(call, retries=retries, base_delay=base_delay)
    except ProviderUnavailableError as exc:
        raise ProviderUnavailableError(str(exc), fingerprint=request.fingerprint()) from exc
    if cache is not None:
        cache.put_generation(request.fingerprint(), raw=raw)
    return raw


def embed_texts(
    texts: Sequence[str],
    provider: EmbeddingProvider,
    cache=None,
    model: str = "",
    retries: int = 3,
    base_delay: float = 0.5,
) -> np.ndarray:
    """Embed a batch, deduplicating repeats and reusing cached vectors.

    Duplicate texts in one batch trigger a single upstream call; previously
    seen texts are served from the cache without any call at all.
    """
    if not texts:
        raise EmptyTextError("embed needs at least one text")
    if any(not t for t in texts):
        raise EmptyTextError("cannot embed an empty string")

    resolved: dict[str, np.ndarray] = {}
    if cache is not None:
        for text in texts:
            cached = cache.get_embedding(model, text)
            if cached is not None:
                resolved[text] = cached
    missing = [t for i, t in enumerate(texts) if t not in resolved and t not in texts[:i]]

    if missing:
        vectors = with_backoff(
            lambda: np.asarray(provider.embed(missing), dtype=float),
            retries=retries,
            base_delay=base_delay,
        )
        if vectors.ndim != 2 or vectors.shape[0] != len(missing):
            raise ProviderContractError("embedding provider returned a malformed batch")
        for text, vec in zip(missing, vectors):
            resolved[text] = vec
            if cache is not None:
                cache.put_embedding(model, text, vec)

    dims = {resolved[t].shape[0] for t in texts}
    if len(dims) != 1:
        raise ProviderContractError(f"inconsistent embedding dimensions: {sorted(dims)}")
    return np.stack([resolved[t] for t in texts])
