"""Response cleaning for models that echo prompts or leak template tokens.

Cleaning applies, in order: (i) strip a leading echo of the question,
(ii) cut each line at the first formatting token, (iii) keep the first
non-empty line, whitespace-trimmed.  The function is idempotent.
"""

from __future__ import annotations

import re

FORMAT_TOKENS = ("[INST]", "[/INST]", "#")


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().casefold()


def strip_question_echo(raw: str, question: str) -> str:
    if not question.strip():
        return raw
    stripped = raw.lstrip()
    q = question.strip()
    if _normalize(stripped[: len(q)]) == _normalize(q):
        return stripped[len(q) :]
    return raw


def _cut_format_tokens(line: str) -> str:
    cut = len(line)
    for token in FORMAT_TOKENS:
        pos = line.find(token)
        if pos != -1:
            cut = min(cut, pos)
    return line[:cut]


def clean_response(raw: str, question: str = "") -> str:
    """Reduce a raw completion to its first meaningful line.

    Returns the empty string when nothing survives; the caller decides
    whether an empty response is acceptable.
    """
    text = strip_question_echo(raw, question)
    for line in text.splitlines():
        candidate = _cut_format_tokens(line).strip()
        if candidate:
            return candidate
    return ""
