"""Substitution lexicon: word -> synonym/hypernym/hyponym alternatives.

Loaded from a tab-separated file with one record per line:

    word<TAB>relation<TAB>alternative

where relation is one of ``syn``, ``hyper`` or ``hypo``.  Any WordNet-style
source can be converted into this shape, which keeps the engine free of a
lexical-database dependency.  Deletion is not stored: the engine always
offers it as the implicit extra member of a word's substitution set.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable

from ..errors import InvalidInputError

RELATIONS = ("syn", "hyper", "hypo")


class SubstitutionLexicon:
    def __init__(self, records: Iterable[tuple[str, str, str]] = ()):
        self._entries: dict[str, dict[str, set[str]]] = defaultdict(
            lambda: {rel: set() for rel in RELATIONS}
        )
        for word, relation, alternative in records:
            self.add(word, relation, alternative)

    def add(self, word: str, relation: str, alternative: str) -> None:
        word = word.strip()
        alternative = alternative.strip()
        if relation not in RELATIONS:
            raise InvalidInputError(
                f"unknown relation {relation!r}; expected one of {RELATIONS}"
            )
        if not word or not alternative:
            raise InvalidInputError("lexicon words and alternatives must be non-empty")
        if alternative.lower() == word.lower():
            return  # a word never substitutes for itself
        self._entries[word.lower()][relation].add(alternative)

    def alternatives(self, word: str) -> tuple[str, ...]:
        """All substitutes of a word (union over relations), sorted."""
        entry = self._entries.get(word.lower())
        if entry is None:
            return ()
        merged = set().union(*entry.values())
        return tuple(sorted(merged))

    def relations(self, word: str) -> dict[str, tuple[str, ...]]:
        entry = self._entries.get(word.lower(), {rel: set() for rel in RELATIONS})
        return {rel: tuple(sorted(values)) for rel, values in entry.items()}

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_path(cls, path) -> "SubstitutionLexicon":
        lexicon = cls()
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InvalidInputError(
                    f"{path}:{lineno}: expected 'word<TAB>relation<TAB>alternative'"
                )
            try:
                lexicon.add(*parts)
            except InvalidInputError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
        return lexicon
