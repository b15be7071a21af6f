from .base import (
    EmbeddingProvider,
    GenerationProvider,
    GenerationRequest,
    embed_texts,
    generate,
    stable_u64,
    with_backoff,
)
from .cache import CachedResponse, ResponseCache, text_key
from .cleaning import FORMAT_TOKENS, clean_response
from .judging import JUDGE_PROMPT, exact_match, judge_correctness, normalize_answer
from .openai_http import OpenAIChatProvider, OpenAIEmbeddingProvider
from .stubs import (
    BagOfWordsEmbedder,
    CannedMapGenerator,
    EchoGenerator,
    HashSignEmbedder,
    OrthogonalEmbedder,
    RecordingGenerator,
    RouletteGenerator,
    StubJudge,
)

__all__ = [
    "BagOfWordsEmbedder",
    "CachedResponse",
    "CannedMapGenerator",
    "EchoGenerator",
    "EmbeddingProvider",
    "FORMAT_TOKENS",
    "GenerationProvider",
    "GenerationRequest",
    "HashSignEmbedder",
    "JUDGE_PROMPT",
    "OpenAIChatProvider",
    "OpenAIEmbeddingProvider",
    "OrthogonalEmbedder",
    "RecordingGenerator",
    "ResponseCache",
    "RouletteGenerator",
    "StubJudge",
    "clean_response",
    "embed_texts",
    "exact_match",
    "generate",
    "judge_correctness",
    "normalize_answer",
    "stable_u64",
    "text_key",
    "with_backoff",
]
