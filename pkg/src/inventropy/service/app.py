"""FastAPI application wrapping the core package.

Every core capability is exposed as a JSON endpoint so the CLI (or any
other client) can drive a long-running instance; compute endpoints are
stateless, generation endpoints use the server's own provider credentials
taken from the environment.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import (
    InvalidInputError,
    InventropyError,
    ProviderConfigError,
    ProviderError,
    ProviderUnavailableError,
)
from . import models, ops

API_VERSION = "0.1.0"


def create_app() -> FastAPI:
    app = FastAPI(title="inventropy", version=API_VERSION)

    @app.exception_handler(InventropyError)
    async def _handle_domain_error(request: Request, exc: InventropyError):
        if isinstance(exc, ProviderUnavailableError):
            status = 502
        elif isinstance(exc, (InvalidInputError, ProviderConfigError)):
            status = 400
        elif isinstance(exc, ProviderError):
            status = 502
        else:
            status = 422
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return models.HealthResponse(status="ok", name="inventropy", version=API_VERSION)

    @app.post("/v1/similarity/affinity", response_model=models.AffinityResponse)
    def affinity(request: models.AffinityRequest):
        return ops.affinity(request)

    @app.post("/v1/uq/score", response_model=models.ScoreResponse)
    def score(request: models.ScoreRequest):
        return ops.score(request)

    @app.post("/v1/perturb", response_model=models.PerturbResponse)
    def perturb(request: models.PerturbRequest):
        return ops.perturb(request)

    @app.post("/v1/generate", response_model=models.GenerateResponse)
    def generate(request: models.GenerateRequest):
        return ops.generate_batch(request)

    @app.post("/v1/embed", response_model=models.EmbedResponse)
    def embed(request: models.EmbedRequest):
        return ops.embed(request)

    @app.post("/v1/metrics/evaluate", response_model=models.EvaluateResponse)
    def evaluate(request: models.EvaluateRequest):
        return ops.evaluate(request)

    @app.post("/v1/metrics/tsu", response_model=models.TsuResponse)
    def tsu(request: models.TsuRequest):
        return ops.tsu(request)

    @app.post("/v1/tangent/check", response_model=models.TangentResponse)
    def tangent_check(request: models.TangentRequest):
        return ops.tangent_check(request)

    @app.post("/v1/clean", response_model=models.CleanResponse)
    def clean(request: models.CleanRequest):
        return ops.clean(request)

    return app


app = create_app()
