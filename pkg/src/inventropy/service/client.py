"""Backends the CLI talks to: in-process dispatch or a remote service.

The CLI is a thin client over the service operations.  By default it runs
them in-process (no daemon needed, fully offline); with ``--server`` the
same requests travel over HTTP to a running instance instead.
"""

from __future__ import annotations

import httpx

from ..errors import ProviderConfigError, ProviderUnavailableError
from . import models, ops

_ROUTES = {
    "affinity": ("/v1/similarity/affinity", ops.affinity, models.AffinityResponse),
    "score": ("/v1/uq/score", ops.score, models.ScoreResponse),
    "perturb": ("/v1/perturb", ops.perturb, models.PerturbResponse),
    "generate": ("/v1/generate", ops.generate_batch, models.GenerateResponse),
    "embed": ("/v1/embed", ops.embed, models.EmbedResponse),
    "evaluate": ("/v1/metrics/evaluate", ops.evaluate, models.EvaluateResponse),
    "tsu": ("/v1/metrics/tsu", ops.tsu, models.TsuResponse),
    "tangent": ("/v1/tangent/check", ops.tangent_check, models.TangentResponse),
    "clean": ("/v1/clean", ops.clean, models.CleanResponse),
}


class LocalBackend:
    """Runs service operations in the current process."""

    def call(self, name: str, request):
        _, op, _ = _ROUTES[name]
        return op(request)


class HttpBackend:
    """Sends the same requests to a remote service instance."""

    def __init__(self, base_url: str, timeout: float = 300.0):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def call(self, name: str, request):
        path, _, response_model = _ROUTES[name]
        try:
            response = self._client.post(
                f"{self.base_url}{path}", json=request.model_dump(mode="json")
            )
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError(f"service unreachable: {exc}") from exc
        if response.status_code >= 400:
            raise ProviderConfigError(
                f"service rejected {name} ({response.status_code}): {response.text[:300]}"
            )
        return response_model.model_validate(response.json())


def make_backend(server: str | None):
    return HttpBackend(server) if server else LocalBackend()
