"""Genetic-algorithm perturbation engine.

Evolves a population of single-edit variants of a source text through
fitness-proportional selection (fitness = similarity to the original),
suffix-swap crossover and single-token mutation over a substitution
lexicon, then samples a fixed-size perturbation set from populations at
several generations so the set spans a range of similarity levels.

All randomness flows through one seeded generator consumed in a fixed
order (selection, crossover pairs, mutation, sampling), so a run is fully
reproducible given the text, config, lexicon and a deterministic embedder.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import InvalidInputError, InventropyError, PerturbationError
from ..similarity import cosine_affinity
from .keywords import KeywordExtractor, select_keywords
from .lexicon import SubstitutionLexicon
from .text import detokenize, tokenize

logger = logging.getLogger(__name__)

DELETION = None  # sentinel member of every substitution set


@dataclass(frozen=True)
class GaapConfig:
    keyword_ratio: float = 0.3
    max_generations: int = 5
    similarity_floor: float = 0.7
    sample_interval: int = 1
    target_count: int = 9
    selection_count: int = 10
    offspring_count: int = 10
    mutation_count: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.keyword_ratio <= 1.0:
            raise InvalidInputError("keyword_ratio must lie in (0, 1]")
        if not 0.0 <= self.similarity_floor <= 1.0:
            raise InvalidInputError("similarity_floor must lie in [0, 1]")
        for name in (
            "max_generations",
            "sample_interval",
            "target_count",
            "selection_count",
            "offspring_count",
            "mutation_count",
        ):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1")


@dataclass
class Individual:
    tokens: tuple[str, ...]
    lineage: tuple[str, tuple[str, ...]]  # (operation, parent texts)
    fitness: float | None = None

    def __post_init__(self):
        if not self.tokens or any(t == "" for t in self.tokens):
            raise InvalidInputError("individuals need non-empty token sequences")

    @property
    def text(self) -> str:
        return detokenize(self.tokens)


@dataclass
class PerturbationSet:
    """The original text plus exactly n sampled perturbations of it."""

    original: str
    texts: list[str]
    embeddings: np.ndarray | None = None

    @property
    def all_texts(self) -> list[str]:
        return [self.original, *self.texts]

    @property
    def size(self) -> int:
        return len(self.texts) + 1


@dataclass
class EvolutionResult:
    generations: list[list[Individual]]
    termination: str  # "max_generations" or "fitness_floor"
    lineage: dict[str, tuple[str, tuple[str, ...]]] = field(default_factory=dict)


def _substitutions(
    token: str, lexicon: SubstitutionLexicon, allow_deletion: bool
) -> list[str | None]:
    options: list[str | None] = list(lexicon.alternatives(token))
    if allow_deletion:
        options.append(DELETION)
    return options


def _apply_edit(tokens: tuple[str, ...], position: int, replacement: str | None) -> tuple[str, ...]:
    if replacement is DELETION:
        return tokens[:position] + tokens[position + 1 :]
    return tokens[:position] + (replacement,) + tokens[position + 1 :]


def init_population(
    tokens: Sequence[str],
    keywords: Sequence[tuple[int, str]],
    lexicon: SubstitutionLexicon,
) -> list[Individual]:
    """Enumerate every single-keyword substitution and deletion, deduplicated.

    A keyword with no lexicon entry still contributes its deletion variant
    unless deleting it would empty the text, in which case it is skipped.
    """
    if not keywords:
        raise InvalidInputError("init_population needs at least one keyword")
    tokens = tuple(tokens)
    original = detokenize(tokens)
    seen: set[tuple[str, ...]] = set()
    population: list[Individual] = []
    for position, token in keywords:
        if tokens[position] != token:
            raise InvalidInputError(f"keyword {token!r} not at position {position}")
        for replacement in _substitutions(token, lexicon, allow_deletion=len(tokens) > 1):
            variant = _apply_edit(tokens, position, replacement)
            if not variant or variant in seen:
                continue
            seen.add(variant)
            op = "delete" if replacement is DELETION else "substitute"
            population.append(Individual(tokens=variant, lineage=(op, (original,))))
    return population


def roulette_select(
    population: Sequence[Individual], count: int, rng: np.random.Generator
) -> list[Individual]:
    """Draw ``count`` individuals with replacement, proportional to fitness."""
    if not population:
        raise InvalidInputError("cannot select from an empty population")
    fitness = np.array([ind.fitness for ind in population], dtype=float)
    if np.any(~np.isfinite(fitness)) or np.any(fitness < 0.0):
        raise InvalidInputError("all fitness values must be finite and >= 0")
    total = fitness.sum()
    if total <= 0.0:
        logger.warning("all fitness values are zero; selecting uniformly")
        probs = np.full(len(population), 1.0 / len(population))
    else:
        probs = fitness / total
    picks = rng.choice(len(population), size=count, replace=True, p=probs)
    return [population[i] for i in picks]


def crossover(
    parent_a: Sequence[str], parent_b: Sequence[str], rng: np.random.Generator
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Swap suffixes at a uniform point h in {1, ..., p-1}, p = shorter length.

    Both offspring come out with length p: the trailing tokens of the longer
    parent are deliberately dropped, matching the recombination rule exactly
    rather than patching it.
    """
    a = tuple(parent_a)
    b = tuple(parent_b)
    if len(a) < 2 or len(b) < 2:
        raise InvalidInputError("crossover parents need at least two tokens each")
    p = min(len(a), len(b))
    h = int(rng.integers(1, p))
    child_a = a[:h] + b[h:p]
    child_b = b[:h] + a[h:p]
    return child_a, child_b


def mutate(
    individual: Individual,
    lexicon: SubstitutionLexicon,
    rng: np.random.Generator,
    max_retries: int = 8,
) -> tuple[Individual, bool]:
    """Replace or delete one uniformly chosen token position.

    The replacement is drawn uniformly from the token's substitution set
    (its lexicon alternatives plus deletion).  Positions whose set is empty
    are resampled a bounded number of times; if none works the individual
    comes back unchanged with ``changed=False``.
    """
    tokens = individual.tokens
    for _ in range(max_retries):
        position = int(rng.integers(0, len(tokens)))
        options = _substitutions(tokens[position], lexicon, allow_deletion=len(tokens) > 1)
        if not options:
            continue
        replacement = options[int(rng.integers(0, len(options)))]
        variant = _apply_edit(tokens, position, replacement)
        return (
            Individual(tokens=variant, lineage=("mutate", (individual.text,))),
            True,
        )
    return individual, False


class _FitnessScorer:
    """Embeds texts on demand and scores similarity to the original."""

    def __init__(self, original: str, embedder, scorer):
        self._embedder = embedder
        self._scorer = scorer
        self._vectors: dict[str, np.ndarray] = {}
        self._fitness: dict[str, float] = {}
        self._original = original

    def vector(self, text: str) -> np.ndarray:
        if text not in self._vectors:
            self._vectors[text] = np.asarray(self._embedder.embed([text])[0], dtype=float)
        return self._vectors[text]

    def fitness(self, text: str) -> float:
        if text not in self._fitness:
            self._fitness[text] = float(
                self._scorer(self.vector(self._original), self.vector(text))
            )
        return self._fitness[text]


def _dedupe(individuals: Sequence[Individual]) -> list[Individual]:
    seen: set[tuple[str, ...]] = set()
    unique = []
    for ind in individuals:
        if ind.tokens in seen:
            continue
        seen.add(ind.tokens)
        unique.append(ind)
    return unique


def evolve(
    text: str,
    config: GaapConfig,
    lexicon: SubstitutionLexicon,
    embedder,
    scorer: Callable = cosine_affinity,
    extractor: KeywordExtractor | None = None,
    rng: np.random.Generator | None = None,
) -> EvolutionResult:
    """Run the generational loop and return every population in order.

    Stops once the configured generation cap is reached or the best
    population fitness drops below the similarity floor.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    tokens = tokenize(text)
    keywords = select_keywords(tokens, config.keyword_ratio, extractor)
    population = init_population(tokens, keywords, lexicon)
    if not population:
        raise PerturbationError(f"no single-edit variants exist for {text!r}")

    fit = _FitnessScorer(text, embedder, scorer)
    lineage: dict[str, tuple[str, tuple[str, ...]]] = {}

    def settle(generation_index: int, individuals: list[Individual]) -> list[Individual]:
        for ind in individuals:
            try:
                ind.fitness = fit.fitness(ind.text)
            except Exception as exc:
                raise InventropyError(
                    f"embedding failed in generation {generation_index}: {exc}"
                ) from exc
            lineage.setdefault(ind.text, ind.lineage)
        return individuals

    generations = [settle(0, _dedupe(population))]
    termination = "max_generations"
    while True:
        t = len(generations)
        if t >= config.max_generations:
            termination = "max_generations"
            break
        current = generations[-1]
        if max(ind.fitness for ind in current) < config.similarity_floor:
            termination = "fitness_floor"
            break

        parents = roulette_select(current, config.selection_count, rng)

        offspring: list[Individual] = []
        attempts = 0
        while len(offspring) < config.offspring_count and attempts < 4 * config.offspring_count:
            attempts += 1
            a = parents[int(rng.integers(0, len(parents)))]
            b = parents[int(rng.integers(0, len(parents)))]
            if len(a.tokens) < 2 or len(b.tokens) < 2:
                continue
            child_a, child_b = crossover(a.tokens, b.tokens, rng)
            for child in (child_a, child_b):
                offspring.append(
                    Individual(tokens=child, lineage=("crossover", (a.text, b.text)))
                )
        offspring = offspring[: config.offspring_count]

        mutants: list[Individual] = []
        for k in range(config.mutation_count if offspring else 0):
            base = offspring[k % len(offspring)]
            mutant, changed = mutate(base, lexicon, rng)
            if changed:
                mutants.append(mutant)

        generations.append(settle(t, _dedupe([*parents, *offspring, *mutants])))

    return EvolutionResult(generations=generations, termination=termination, lineage=lineage)


def build_perturbation_set(
    result: EvolutionResult | Sequence[Sequence[Individual]],
    config: GaapConfig,
    rng: np.random.Generator,
    original: str | None = None,
) -> PerturbationSet:
    """Sample exactly ``target_count`` texts from every tau-th generation.

    Draws rotate round-robin across the sampled generations, taking one
    uniform not-yet-chosen text per visit.  If the populations hold fewer
    unique texts than requested, existing picks are duplicated at random;
    if more, the round-robin subsampling keeps a uniform spread.
    """
    generations = result.generations if isinstance(result, EvolutionResult) else list(result)
    if not generations:
        raise InvalidInputError("need at least one generation to sample from")
    if original is None:
        if not isinstance(result, EvolutionResult) or not generations[0]:
            raise InvalidInputError("original text is required")
        original = generations[0][0].lineage[1][0]

    tiers = [
        [ind.text for ind in generations[q]]
        for q in range(0, len(generations), config.sample_interval)
    ]
    pools = []
    for tier in tiers:
        unique = [t for i, t in enumerate(tier) if t not in tier[:i] and t != original]
        pools.append(unique)
    if not any(pools):
        raise PerturbationError("no candidate perturbations in any generation")

    chosen: list[str] = []
    taken: set[str] = set()
    while len(chosen) < config.target_count:
        progress = False
        for pool in pools:
            if len(chosen) >= config.target_count:
                break
            available = [t for t in pool if t not in taken]
            if not available:
                continue
            pick = available[int(rng.integers(0, len(available)))]
            chosen.append(pick)
            taken.add(pick)
            progress = True
        if not progress:
            break
    while len(chosen) < config.target_count:
        chosen.append(chosen[int(rng.integers(0, len(chosen)))])

    return PerturbationSet(original=original, texts=chosen)


def perturb(
    text: str,
    config: GaapConfig,
    lexicon: SubstitutionLexicon,
    embedder,
    scorer: Callable = cosine_affinity,
    extractor: KeywordExtractor | None = None,
) -> PerturbationSet:
    """Evolve, sample and embed a complete perturbation set for one text."""
    rng = np.random.default_rng(config.seed)
    result = evolve(text, config, lexicon, embedder, scorer, extractor, rng=rng)
    pset = build_perturbation_set(result, config, rng, original=text)
    pset.embeddings = np.asarray(embedder.embed(pset.all_texts), dtype=float)
    return pset
