from .engine import (
    DELETION,
    EvolutionResult,
    GaapConfig,
    Individual,
    PerturbationSet,
    build_perturbation_set,
    crossover,
    evolve,
    init_population,
    mutate,
    perturb,
    roulette_select,
)
from .keywords import STOPWORDS, default_extractor, select_keywords
from .lexicon import SubstitutionLexicon
from .text import detokenize, is_punctuation, tokenize

__all__ = [
    "DELETION",
    "EvolutionResult",
    "GaapConfig",
    "Individual",
    "PerturbationSet",
    "STOPWORDS",
    "SubstitutionLexicon",
    "build_perturbation_set",
    "crossover",
    "default_extractor",
    "detokenize",
    "evolve",
    "init_population",
    "is_punctuation",
    "mutate",
    "perturb",
    "roulette_select",
    "select_keywords",
    "tokenize",
]
