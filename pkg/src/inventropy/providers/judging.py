"""Correctness judging: exact match or a semantic-equivalence judge model."""

from __future__ import annotations

import re
import string

from ..errors import InvalidInputError, UnjudgeableError
from .base import GenerationProvider

JUDGE_PROMPT = (
    "Are the following two answers to my question Q semantically equivalent? \n"
    "Q: {question} \nA1: {reference} \nA2: {answer} \n"
    "Please answer with a single word, either Yes or No."
)

JUDGE_TEMPERATURE = 0.0


def normalize_answer(text: str) -> str:
    collapsed = re.sub(r"\s+", " ", text).strip().casefold()
    return collapsed.strip(string.punctuation + " ")


def exact_match(reference: str, answer: str) -> bool:
    return normalize_answer(reference) == normalize_answer(answer)


def _parse_verdict(reply: str) -> bool | None:
    match = re.search(r"[A-Za-z]+", reply)
    if match is None:
        return None
    word = match.group(0).casefold()
    if word == "yes":
        return True
    if word == "no":
        return False
    return None


def judge_correctness(
    question: str,
    reference: str,
    answer: str,
    provider: GenerationProvider | None = None,
    mode: str = "exact",
) -> bool:
    """Decide whether ``answer`` matches ``reference`` for ``question``.

    ``exact`` compares normalised strings (the right call for multiple
    choice); ``judge`` asks a provider at temperature 0 and accepts a reply
    whose first word is yes/no, retrying once on anything else.
    """
    if mode == "exact":
        return exact_match(reference, answer)
    if mode != "judge":
        raise InvalidInputError(f"unknown judge mode {mode!r}")
    if provider is None:
        raise InvalidInputError("judge mode requires a provider")

    prompt = JUDGE_PROMPT.format(question=question, reference=reference, answer=answer)
    last_reply = ""
    for _ in range(2):
        last_reply = provider.complete(prompt, temperature=JUDGE_TEMPERATURE, replicate=0)
        verdict = _parse_verdict(last_reply)
        if verdict is not None:
            return verdict
    raise UnjudgeableError(f"judge produced no yes/no verdict: {last_reply!r}")
