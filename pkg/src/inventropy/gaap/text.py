"""Word-level tokenisation for the perturbation engine.

Texts are split on whitespace with punctuation detached into its own
tokens, so substitutions and deletions always operate on whole words.
``detokenize`` re-attaches punctuation when rendering a token sequence
back into a sentence.
"""

from __future__ import annotations

import re

from ..errors import EmptyTextError, InvalidInputError

_TOKEN_RE = re.compile(r"[\w'-]+|[^\w\s]")
_PUNCT_RE = re.compile(r"^[^\w\s]$")


def tokenize(text: str) -> list[str]:
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise EmptyTextError("cannot tokenize an empty text")
    return tokens


def detokenize(tokens) -> str:
    if not tokens:
        raise InvalidInputError("cannot render an empty token sequence")
    if any(t == "" for t in tokens):
        raise InvalidInputError("token sequences must not contain empty tokens")
    joined = " ".join(tokens)
    return re.sub(r"\s+([^\w\s])", r"\1", joined)


def is_punctuation(token: str) -> bool:
    return bool(_PUNCT_RE.match(token))
