"""Run configuration: provider wiring, sampling counts, seeds, stage paths.

Config files are JSON or YAML with the same key set as ``RunConfig``.  Stub
providers make every stage runnable offline; live providers only need a
base URL and model id, with the API key read from an environment variable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field, field_validator

from .errors import InvalidInputError, ProviderConfigError
from .gaap import GaapConfig
from .providers import (
    BagOfWordsEmbedder,
    CannedMapGenerator,
    EchoGenerator,
    HashSignEmbedder,
    OpenAIChatProvider,
    OpenAIEmbeddingProvider,
    OrthogonalEmbedder,
    RouletteGenerator,
)

DEFAULT_MEASURES = ["inv_entropy", "ni_entropy", "wd_px_py", "max_py_x"]


class GenerationSpec(BaseModel):
    kind: Literal["openai", "stub-canned", "stub-roulette", "stub-echo"] = "stub-echo"
    base_url: str = ""
    model: str = "stub"
    api_key_env: str = "OPENAI_API_KEY"
    # stub-canned
    mapping: dict[str, str] = Field(default_factory=dict)
    match: Literal["exact", "contains"] = "contains"
    default_answer: Optional[str] = None
    # stub-roulette
    answers: list[str] = Field(default_factory=list)
    seed: int = 0

    def build(self):
        if self.kind == "openai":
            return OpenAIChatProvider(self.base_url, self.model, self.api_key_env)
        if self.kind == "stub-canned":
            return CannedMapGenerator(self.mapping, match=self.match, default=self.default_answer)
        if self.kind == "stub-roulette":
            return RouletteGenerator(self.answers, seed=self.seed)
        if self.kind == "stub-echo":
            return EchoGenerator()
        raise ProviderConfigError(f"unknown generation kind {self.kind!r}")


class EmbeddingSpec(BaseModel):
    kind: Literal["openai", "stub-orthogonal", "stub-hash", "stub-bow"] = "stub-orthogonal"
    base_url: str = ""
    model: str = "stub"
    api_key_env: str = "OPENAI_API_KEY"
    dimension: int = 4096
    seed: int = 0

    def build(self):
        if self.kind == "openai":
            return OpenAIEmbeddingProvider(self.base_url, self.model, self.api_key_env)
        if self.kind == "stub-orthogonal":
            return OrthogonalEmbedder(dimension=self.dimension)
        if self.kind == "stub-hash":
            return HashSignEmbedder(dimension=min(self.dimension, 256), seed=self.seed)
        if self.kind == "stub-bow":
            return BagOfWordsEmbedder(dimension=min(self.dimension, 1024))
        raise ProviderConfigError(f"unknown embedding kind {self.kind!r}")


class GaapSettings(BaseModel):
    keyword_ratio: float = 0.3
    max_generations: int = 5
    similarity_floor: float = 0.7
    sample_interval: int = 1
    selection_count: int = 10
    offspring_count: int = 10
    mutation_count: int = 10
    lexicon_path: Optional[str] = None
    fitness_embedder: EmbeddingSpec = Field(
        default_factory=lambda: EmbeddingSpec(kind="stub-bow")
    )

    def engine_config(self, n: int, seed: int) -> GaapConfig:
        return GaapConfig(
            keyword_ratio=self.keyword_ratio,
            max_generations=self.max_generations,
            similarity_floor=self.similarity_floor,
            sample_interval=self.sample_interval,
            target_count=n,
            selection_count=self.selection_count,
            offspring_count=self.offspring_count,
            mutation_count=self.mutation_count,
            seed=seed,
        )


class RunConfig(BaseModel):
    n: int = 9
    r: int = 5
    bootstraps: int = 30
    temperatures: list[float] = Field(default_factory=lambda: [1.0])
    seed: int = 0
    measures: list[str] = Field(default_factory=lambda: list(DEFAULT_MEASURES))
    perturb_mode: Literal["gaap", "paraphrase", "file"] = "gaap"
    perturbation_file: Optional[str] = None
    generation: GenerationSpec = Field(default_factory=GenerationSpec)
    embedding: EmbeddingSpec = Field(default_factory=EmbeddingSpec)
    judge_mode: Literal["exact", "judge"] = "exact"
    judge: Optional[GenerationSpec] = None
    prompts: dict[str, str] = Field(default_factory=dict)
    paraphrase_temperature: float = 0.7
    cache_dir: Optional[str] = None
    stage_dir: str = "stages"
    max_items: int = 50
    parallelism: int = 1
    retries: int = 3
    retry_base_delay: float = 0.5
    gaap: GaapSettings = Field(default_factory=GaapSettings)

    @field_validator("n", "r", "bootstraps")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("n, r and bootstraps must all be >= 1")
        return value

    @field_validator("temperatures")
    @classmethod
    def _temps(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("at least one temperature is required")
        return value


def load_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**data)
    except Exception as exc:
        raise InvalidInputError(f"invalid config {path}: {exc}") from exc


def apply_stub_mode(config: RunConfig, stub: str) -> RunConfig:
    """Force offline stub providers, as selected by the --stub CLI flag."""
    kinds = {
        "echo": GenerationSpec(kind="stub-echo"),
        "canned": GenerationSpec(
            kind="stub-canned", mapping=config.generation.mapping, match="contains",
            default_answer=config.generation.default_answer,
        ),
        "roulette": GenerationSpec(
            kind="stub-roulette",
            answers=config.generation.answers or ["alpha", "beta", "gamma"],
            seed=config.seed,
        ),
    }
    if stub not in kinds:
        raise InvalidInputError(f"unknown stub mode {stub!r}; pick one of {sorted(kinds)}")
    update = {"generation": kinds[stub]}
    if config.embedding.kind == "openai":
        update["embedding"] = EmbeddingSpec(kind="stub-orthogonal")
    if config.judge_mode == "judge":
        update["judge_mode"] = "exact"
    return config.model_copy(update=update)
