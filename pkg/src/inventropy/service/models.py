"""Pydantic request/response models for the scoring service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from ..config import EmbeddingSpec, GenerationSpec


class HealthResponse(BaseModel):
    status: str
    name: str
    version: str


class AffinityRequest(BaseModel):
    vectors: list[list[float]]


class AffinityResponse(BaseModel):
    matrix: list[list[float]]
    transition: list[list[float]]


class BootstrapParams(BaseModel):
    count: int = 30
    seed: int = 0


class MeasureResultModel(BaseModel):
    value: float
    per_bootstrap: list[float]


class ScoreRequest(BaseModel):
    input_vectors: list[list[float]]
    # response_vectors[state][replicate] is one embedding
    response_vectors: list[list[list[float]]]
    bootstrap: BootstrapParams = Field(default_factory=BootstrapParams)
    measures: list[str] = Field(
        default_factory=lambda: ["inv_entropy", "ni_entropy", "wd_px_py", "max_py_x"]
    )


class ScoreResponse(BaseModel):
    measures: dict[str, MeasureResultModel]


class GaapParams(BaseModel):
    keyword_ratio: float = 0.3
    max_generations: int = 5
    similarity_floor: float = 0.7
    sample_interval: int = 1
    target_count: int = 9
    selection_count: int = 10
    offspring_count: int = 10
    mutation_count: int = 10


class PerturbRequest(BaseModel):
    question: str
    seed: int = 0
    config: GaapParams = Field(default_factory=GaapParams)
    # inline records: [word, relation, alternative]
    lexicon: list[tuple[str, str, str]] = Field(default_factory=list)
    lexicon_path: Optional[str] = None
    fitness_embedder: EmbeddingSpec = Field(
        default_factory=lambda: EmbeddingSpec(kind="stub-bow")
    )


class PerturbResponse(BaseModel):
    original: str
    perturbations: list[str]
    termination: str
    generations: int


class GenerateItem(BaseModel):
    id: str
    prompts: list[str]


class GenerateRequest(BaseModel):
    items: list[GenerateItem]
    replicates: int = 1
    temperature: float = 1.0
    seed: int = 0
    provider: GenerationSpec = Field(default_factory=GenerationSpec)
    clean: bool = True
    retries: int = 3


class GeneratedState(BaseModel):
    prompt: str
    replicates: list[dict[str, str]]  # {"raw": ..., "cleaned": ...}


class GeneratedItem(BaseModel):
    id: str
    states: list[GeneratedState]


class GenerateResponse(BaseModel):
    items: list[GeneratedItem]


class EmbedRequest(BaseModel):
    texts: list[str]
    provider: EmbeddingSpec = Field(default_factory=EmbeddingSpec)


class EmbedResponse(BaseModel):
    vectors: list[list[float]]


class EvalRecordModel(BaseModel):
    id: str
    score: float
    correct: bool


class EvaluateRequest(BaseModel):
    records: list[EvalRecordModel]
    resamples: int = 40
    seed: int = 0


class MetricStats(BaseModel):
    mean: float
    stddev: float
    point: float


class EvaluateResponse(BaseModel):
    auroc: MetricStats
    prr: MetricStats
    brier: MetricStats
    n_records: int


class TsuSeriesModel(BaseModel):
    id: str
    scores: dict[str, float]  # temperature rendered with format(t, "g")


class TsuRequest(BaseModel):
    series: list[TsuSeriesModel]
    temperatures: list[float]


class TsuResponse(BaseModel):
    tsu: dict[str, float]
    n_items: int


class TangentRequest(BaseModel):
    preset: str = "quadratic"  # linear | quadratic | rippled
    angle_deg: float = 90.0
    sigmas: list[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025])
    samples: int = 100_000
    seed: int = 0


class TangentRow(BaseModel):
    sigma: float
    empirical: float
    predicted: float
    gap: float


class TangentResponse(BaseModel):
    rows: list[TangentRow]


class CleanRequest(BaseModel):
    raw: str
    question: str = ""


class CleanResponse(BaseModel):
    cleaned: str
    empty: bool
