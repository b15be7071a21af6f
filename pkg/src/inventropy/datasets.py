"""Dataset ingestion and prompt rendering.

Datasets are JSONL files, one item per line:

    {"id": "...", "question": "...", "answer": "...",
     "category": "qa" | "multiple-choice" | "math", "choices": [...]}

``category`` defaults to "qa"; multiple-choice items must carry choices.
Prompt templates append the answer-format instruction expected by concise
QA benchmarks and are overridable per category through the run config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidInputError

CATEGORIES = ("qa", "multiple-choice", "math")

DEFAULT_PROMPT_TEMPLATES = {
    "qa": "{question} Answer concisely and return only the name.",
    "multiple-choice": "{question}\n{choices}\nAnswer concisely and return only the name.",
    "math": "{question} Answer concisely and return only the result itself.",
    "paraphrase": "Please Provide {count} paraphrases for this sentence: {sentence}",
}


@dataclass(frozen=True)
class DatasetItem:
    id: str
    question: str
    answer: str
    category: str = "qa"
    choices: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.question.strip():
            raise InvalidInputError(f"item {self.id!r} has an empty question")
        if self.category not in CATEGORIES:
            raise InvalidInputError(
                f"item {self.id!r} has unknown category {self.category!r}"
            )
        if self.category == "multiple-choice" and not self.choices:
            raise InvalidInputError(f"multiple-choice item {self.id!r} needs choices")


def ingest_dataset(path, limit: int | None = None) -> list[DatasetItem]:
    """Parse and validate a JSONL dataset, failing with line numbers."""
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"dataset file {path} does not exist")
    items: list[DatasetItem] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                item = DatasetItem(
                    id=str(raw["id"]),
                    question=str(raw["question"]),
                    answer=str(raw["answer"]),
                    category=raw.get("category", "qa"),
                    choices=tuple(raw.get("choices") or ()),
                )
            except KeyError as exc:
                raise InvalidInputError(f"{path}:{lineno}: missing key {exc}") from exc
            except InvalidInputError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
            if item.id in seen_ids:
                raise InvalidInputError(f"{path}:{lineno}: duplicate id {item.id!r}")
            seen_ids.add(item.id)
            items.append(item)
            if limit is not None and len(items) >= limit:
                break
    if not items:
        raise InvalidInputError(f"dataset {path} contains no items")
    return items


def render_prompt(
    question: str,
    category: str = "qa",
    choices: tuple[str, ...] = (),
    templates: dict[str, str] | None = None,
) -> str:
    """Render the generation prompt for one (possibly perturbed) question."""
    merged = dict(DEFAULT_PROMPT_TEMPLATES)
    if templates:
        merged.update(templates)
    template = merged.get(category)
    if template is None:
        raise InvalidInputError(f"no prompt template for category {category!r}")
    return template.format(question=question, choices="\n".join(choices))
