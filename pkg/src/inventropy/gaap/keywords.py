"""Keyword selection: which token positions are worth perturbing.

The default extractor is deliberately dependency-free and deterministic:
tokens are scored by inverse corpus frequency from a bundled rank table
(rare words score high, unknown words highest), stopwords and punctuation
are excluded, and ties break by position.  A smarter provider-backed
extractor can be injected; if it fails, selection falls back to the
default with a warning.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

from ..errors import InvalidInputError
from .text import is_punctuation

logger = logging.getLogger(__name__)

# Callable(tokens, count) -> ranked token positions.
KeywordExtractor = Callable[[Sequence[str], int], Sequence[int]]

STOPWORDS = frozenset(
    """
    a an the and or but if while of at by for with about against between into
    through during before after above below to from up down in out on off over
    under again further then once here there when where why how all any both
    each few more most other some such no nor not only own same so than too
    very can will just should now is are was were be been being have has had
    having do does did doing would could might must shall may am he she it
    they them his her its their this that these those i you we me him us my
    your our who whom which what as
    """.split()
)


@lru_cache(maxsize=1)
def _word_ranks() -> dict[str, int]:
    data = resources.files("inventropy.gaap").joinpath("data/word_ranks.txt")
    ranks: dict[str, int] = {}
    for rank, line in enumerate(data.read_text(encoding="utf-8").splitlines(), start=1):
        word = line.strip().lower()
        if word and word not in ranks:
            ranks[word] = rank
    return ranks


def rarity_score(token: str) -> float:
    """1/rank for words in the bundled table, 1.0 (maximal) for unknowns."""
    rank = _word_ranks().get(token.lower())
    return 1.0 if rank is None else 1.0 - 1.0 / (1.0 + 1.0 / rank)  # = 1/(rank+1)


def default_extractor(tokens: Sequence[str], count: int) -> list[int]:
    """Rank content-word positions by rarity, then fill with leftovers.

    Ordering is (rarer first, earlier position first).  If the text has
    fewer content words than requested, remaining non-punctuation and then
    punctuation positions pad the list so the contract count is met.
    """
    content = [
        i
        for i, t in enumerate(tokens)
        if not is_punctuation(t) and t.lower() not in STOPWORDS
    ]
    ranked = sorted(content, key=lambda i: (-rarity_score(tokens[i]), i))
    if len(ranked) < count:
        leftovers = [
            i
            for i, t in enumerate(tokens)
            if i not in set(ranked) and not is_punctuation(t)
        ]
        ranked.extend(leftovers)
    if len(ranked) < count:
        ranked.extend(i for i in range(len(tokens)) if i not in set(ranked))
    return ranked[:count]


def select_keywords(
    tokens: Sequence[str],
    ratio: float,
    extractor: KeywordExtractor | None = None,
) -> list[tuple[int, str]]:
    """Pick max(1, int(ratio * len(tokens))) distinct positions to perturb."""
    if not 0.0 < ratio <= 1.0:
        raise InvalidInputError("keyword ratio must lie in (0, 1]")
    if not tokens:
        raise InvalidInputError("cannot select keywords from an empty sequence")
    count = max(1, int(ratio * len(tokens)))

    positions: Sequence[int] | None = None
    if extractor is not None:
        try:
            positions = list(extractor(tokens, count))
            if len(set(positions)) != count or any(
                not 0 <= p < len(tokens) for p in positions
            ):
                raise InvalidInputError(
                    f"extractor returned {positions!r}, expected {count} distinct positions"
                )
        except Exception as exc:
            logger.warning("keyword extractor failed (%s); using default", exc)
            positions = None
    if positions is None:
        positions = default_extractor(tokens, count)
    return [(p, tokens[p]) for p in positions]
