"""HTTP clients speaking the chat-completions / embeddings JSON dialect.

Both clients post plain JSON to an OpenAI-compatible gateway, which keeps
the pipeline model-agnostic: anything from a hosted API to a local server
works as long as it speaks this de-facto schema.  API keys come from an
environment variable so they never land in config files or artifacts.

Transient failures (timeouts, 429, 5xx) surface as
``ProviderUnavailableError`` so the calling layer can back off and retry;
other 4xx responses are configuration errors and are not retried.
"""

from __future__ import annotations

import logging
import os
from typing import Sequence

import httpx
import numpy as np

from ..errors import ProviderConfigError, ProviderContractError, ProviderUnavailableError

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class _HttpProvider:
    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        if not base_url:
            raise ProviderConfigError("provider base_url is required")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self._client = client or httpx.Client(timeout=timeout)
        self.call_count = 0
        self.request_log: list[dict] = []

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        self.call_count += 1
        self.request_log.append(payload)
        try:
            response = self._client.post(
                f"{self.base_url}{path}", json=payload, headers=self._headers()
            )
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(f"request failed: {exc}") from exc
        if response.status_code in RETRYABLE_STATUS:
            raise ProviderUnavailableError(
                f"provider returned {response.status_code}: {response.text[:200]}"
            )
        if response.status_code >= 400:
            raise ProviderConfigError(
                f"provider rejected request ({response.status_code}): {response.text[:200]}"
            )
        try:
            return response.json()
        except ValueError as exc:
            raise ProviderContractError("provider returned non-JSON body") from exc


class OpenAIChatProvider(_HttpProvider):
    def complete(self, prompt: str, *, temperature: float, replicate: int) -> str:
        # temperature passes through unmodified; replicate only shapes caching
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        body = self._post("/chat/completions", payload)
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderContractError(f"malformed chat completion: {body!r}") from exc


class OpenAIEmbeddingProvider(_HttpProvider):
    def embed(self, texts: Sequence[str]) -> np.ndarray:
        payload = {"model": self.model, "input": list(texts)}
        body = self._post("/embeddings", payload)
        try:
            rows = sorted(body["data"], key=lambda item: item["index"])
            vectors = [np.asarray(item["embedding"], dtype=float) for item in rows]
        except (KeyError, TypeError) as exc:
            raise ProviderContractError(f"malformed embeddings body: {body!r}") from exc
        if len(vectors) != len(texts):
            raise ProviderContractError(
                f"asked for {len(texts)} embeddings, received {len(vectors)}"
            )
        dims = {v.shape for v in vectors}
        if len(dims) != 1:
            raise ProviderContractError(f"inconsistent embedding dimensions: {dims}")
        return np.stack(vectors)
