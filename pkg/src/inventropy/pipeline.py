"""Staged evaluation pipeline: perturb -> generate -> score -> evaluate.

Every stage reads the previous stage's JSONL artifact from the stage
directory and writes its own, so runs are resumable, diffable and safe to
re-run against paid providers (generation goes through the response cache).
Per-item failures are isolated: a failing item is recorded and skipped, a
global provider outage aborts after flushing partial output.

Artifact files, with T the temperature rendered via ``format(T, 'g')``:

    perturbations.jsonl          one row per item
    responses_t{T}.jsonl         raw + cleaned replicates per state
    embeddings_t{T}.jsonl        base64 float64 vectors per item
    scores_t{T}.jsonl            measure values, traces and correctness
    summary.json                 metric -> mean +- stddev per measure
    rejection_curves.csv         plot-ready rejection curves
    tsu.json / tsu_breakdown.csv temperature-sensitivity tables
    failures.jsonl               isolated per-item errors
    report.json                  the full per-question report
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .datasets import DatasetItem, render_prompt
from .errors import (
    InvalidInputError,
    InventropyError,
    MissingArtifactError,
    PerturbationError,
    ProviderUnavailableError,
)
from .gaap import SubstitutionLexicon, perturb as gaap_perturb
from .measures import CONFIDENCE_MEASURES, BootstrapPlan, bootstrap_measures
from .metrics import (
    EvalRecord,
    TemperatureSeries,
    auroc,
    bootstrap_statistic,
    brier,
    isotonic_fit,
    prr,
    rejection_curve,
    tsu_table,
)
from .providers import (
    GenerationRequest,
    ResponseCache,
    clean_response,
    embed_texts,
    generate,
    judge_correctness,
    stable_u64,
)
from .providers.cache import _decode_vector, _encode_vector

logger = logging.getLogger(__name__)


def t_key(temperature: float) -> str:
    return format(float(temperature), "g")


def dump_row(row: dict) -> str:
    return json.dumps(row, ensure_ascii=False, sort_keys=True)


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(dump_row(row) + "\n")


def read_jsonl(path: Path) -> list[dict]:
    with path.open(encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(path, stage)
    return path


@dataclass
class StagePaths:
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def perturbations(self) -> Path:
        return self.root / "perturbations.jsonl"

    def responses(self, temperature: float) -> Path:
        return self.root / f"responses_t{t_key(temperature)}.jsonl"

    def embeddings(self, temperature: float) -> Path:
        return self.root / f"embeddings_t{t_key(temperature)}.jsonl"

    def scores(self, temperature: float) -> Path:
        return self.root / f"scores_t{t_key(temperature)}.jsonl"

    @property
    def summary(self) -> Path:
        return self.root / "summary.json"

    @property
    def curves(self) -> Path:
        return self.root / "rejection_curves.csv"

    @property
    def tsu_json(self) -> Path:
        return self.root / "tsu.json"

    @property
    def tsu_csv(self) -> Path:
        return self.root / "tsu_breakdown.csv"

    @property
    def failures(self) -> Path:
        return self.root / "failures.jsonl"

    @property
    def report(self) -> Path:
        return self.root / "report.json"


@dataclass
class UncertaintyReport:
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {"rows": self.rows, "summary": self.summary, "failures": self.failures}
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1)


def _item_seed(config: RunConfig, purpose: str, item_id: str) -> int:
    return stable_u64(config.seed, purpose, item_id)


def _build_cache(config: RunConfig) -> ResponseCache | None:
    return ResponseCache(config.cache_dir) if config.cache_dir else None


# ---------------------------------------------------------------------------
# perturb
# ---------------------------------------------------------------------------

_ENUM_RE = re.compile(r"^\s*(?:\d+\s*[.):]?\s*|[-*]\s+)")


def _parse_paraphrases(raw: str) -> list[str]:
    lines = [
        _ENUM_RE.sub("", line).strip() for line in raw.splitlines()
    ]
    unique: list[str] = []
    for line in lines:
        if line and line not in unique:
            unique.append(line)
    return unique


def _fit_count(texts: list[str], n: int, rng: np.random.Generator) -> list[str]:
    """Force exactly n perturbations: subsample extras, duplicate shortfalls."""
    if not texts:
        raise PerturbationError("no perturbations to sample from")
    texts = list(texts)
    if len(texts) > n:
        picks = rng.choice(len(texts), size=n, replace=False)
        return [texts[i] for i in sorted(picks)]
    while len(texts) < n:
        texts.append(texts[int(rng.integers(0, len(texts)))])
    return texts


def _perturb_item(item: DatasetItem, config: RunConfig, context: dict) -> list[str]:
    seed = _item_seed(config, "perturb", item.id)
    rng = np.random.default_rng(seed)
    if config.perturb_mode == "gaap":
        engine_config = config.gaap.engine_config(config.n, seed)
        pset = gaap_perturb(
            item.question, engine_config, context["lexicon"], context["fitness_embedder"]
        )
        return pset.texts
    if config.perturb_mode == "paraphrase":
        # the paraphrase prompt takes (count, sentence) rather than a question
        template = config.prompts.get(
            "paraphrase",
            "Please Provide {count} paraphrases for this sentence: {sentence}",
        )
        request = GenerationRequest(
            model=config.generation.model,
            prompt=template.format(count=config.n, sentence=item.question),
            temperature=config.paraphrase_temperature,
            replicate=0,
            seed=seed,
        )
        raw = generate(
            request,
            context["generator"],
            retries=config.retries,
            cache=context["cache"],
            base_delay=config.retry_base_delay,
        )
        return _fit_count(_parse_paraphrases(raw), config.n, rng)
    if config.perturb_mode == "file":
        by_id = context["file_perturbations"]
        if item.id not in by_id:
            raise PerturbationError(f"perturbation file has no entry for {item.id!r}")
        return _fit_count(list(by_id[item.id]), config.n, rng)
    raise InvalidInputError(f"unknown perturb mode {config.perturb_mode!r}")


def stage_perturb(
    items: list[DatasetItem], config: RunConfig, paths: StagePaths
) -> tuple[list[dict], list[dict]]:
    context: dict = {"cache": _build_cache(config)}
    if config.perturb_mode == "gaap":
        if not config.gaap.lexicon_path:
            raise InvalidInputError("gaap mode needs gaap.lexicon_path in the config")
        context["lexicon"] = SubstitutionLexicon.from_path(config.gaap.lexicon_path)
        context["fitness_embedder"] = config.gaap.fitness_embedder.build()
    elif config.perturb_mode == "paraphrase":
        context["generator"] = config.generation.build()
    elif config.perturb_mode == "file":
        if not config.perturbation_file:
            raise InvalidInputError("file mode needs perturbation_file in the config")
        context["file_perturbations"] = {
            row["id"]: row["perturbations"]
            for row in read_jsonl(Path(config.perturbation_file))
        }

    rows, failures = [], []
    for item in items:
        try:
            perturbations = _perturb_item(item, config, context)
        except ProviderUnavailableError:
            write_jsonl(paths.perturbations, rows)
            raise
        except InventropyError as exc:
            failures.append({"id": item.id, "stage": "perturb", "error": str(exc)})
            continue
        rows.append(
            {
                "id": item.id,
                "question": item.question,
                "answer": item.answer,
                "category": item.category,
                "choices": list(item.choices),
                "perturbations": perturbations,
                "mode": config.perturb_mode,
                "seed": _item_seed(config, "perturb", item.id),
            }
        )
    write_jsonl(paths.perturbations, rows)
    _append_failures(paths, failures)
    return rows, failures


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _generate_item(row: dict, config: RunConfig, temperature: float, provider, cache) -> dict:
    questions = [row["question"], *row["perturbations"]]
    seed = _item_seed(config, "generate", row["id"])
    states = []
    requests = []
    for index, question in enumerate(questions):
        prompt = render_prompt(
            question, row.get("category", "qa"), tuple(row.get("choices", ())), config.prompts
        )
        for replicate in range(config.r):
            requests.append(
                (
                    index,
                    replicate,
                    GenerationRequest(
                        model=config.generation.model,
                        prompt=prompt,
                        temperature=temperature,
                        replicate=replicate,
                        seed=seed,
                    ),
                )
            )
        states.append({"index": index, "question": question, "prompt": prompt, "replicates": []})

    def run(request: GenerationRequest) -> str:
        return generate(
            request,
            provider,
            retries=config.retries,
            cache=cache,
            base_delay=config.retry_base_delay,
        )

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            raws = list(pool.map(run, [req for _, _, req in requests]))
    else:
        raws = [run(req) for _, _, req in requests]

    # assembled by (state, replicate) order, never completion order
    by_state: dict[int, list[tuple[int, str, str]]] = {}
    for (index, replicate, request), raw in zip(requests, raws):
        cleaned = clean_response(raw, question=request.prompt)
        by_state.setdefault(index, []).append((replicate, raw, cleaned))
        if cache is not None and cache.get_generation(request.fingerprint()).cleaned != cleaned:
            cache.put_generation(request.fingerprint(), raw=raw, cleaned=cleaned)
    for state in states:
        replicates = sorted(by_state[state["index"]])
        state["replicates"] = [
            {"replicate": rep, "raw": raw, "cleaned": cleaned} for rep, raw, cleaned in replicates
        ]
    return {"id": row["id"], "temperature": temperature, "states": states}


def stage_generate(
    config: RunConfig, paths: StagePaths, temperature: float
) -> tuple[list[dict], list[dict]]:
    perturbed = read_jsonl(_require(paths.perturbations, "perturb"))
    provider = config.generation.build()
    cache = _build_cache(config)
    rows, failures = [], []
    for row in perturbed:
        try:
            rows.append(_generate_item(row, config, temperature, provider, cache))
        except ProviderUnavailableError:
            write_jsonl(paths.responses(temperature), rows)
            raise
        except InventropyError as exc:
            failures.append({"id": row["id"], "stage": "generate", "error": str(exc)})
    write_jsonl(paths.responses(temperature), rows)
    _append_failures(paths, failures)
    return rows, failures


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


def _response_text(replicate: dict) -> str:
    cleaned = replicate.get("cleaned", "").strip()
    if cleaned:
        return cleaned
    fallback = replicate.get("raw", "").strip()
    if fallback:
        return fallback
    raise InvalidInputError("empty response with no usable raw text")


def _score_item(
    perturbed: dict,
    responses: dict,
    config: RunConfig,
    embedder,
    judge_provider,
    cache,
) -> tuple[dict, dict]:
    states = sorted(responses["states"], key=lambda s: s["index"])
    questions = [s["question"] for s in states]
    texts = [[_response_text(rep) for rep in s["replicates"]] for s in states]
    if any(len(t) != config.r for t in texts):
        raise InvalidInputError("replicate count mismatch against the run config")

    model = config.embedding.model
    question_vectors = embed_texts(questions, embedder, cache=cache, model=model)
    flat = [text for per_state in texts for text in per_state]
    flat_vectors = embed_texts(flat, embedder, cache=cache, model=model)
    response_vectors = flat_vectors.reshape(len(states), config.r, -1)

    from .similarity import build_affinity_matrix

    a_x = build_affinity_matrix(question_vectors)
    plan = BootstrapPlan(
        count=config.bootstraps, seed=_item_seed(config, "bootstrap", perturbed["id"])
    )
    results = bootstrap_measures(a_x, response_vectors, plan, measures=config.measures)

    answer = texts[0][0]
    correct = judge_correctness(
        perturbed["question"],
        perturbed["answer"],
        answer,
        provider=judge_provider,
        mode=config.judge_mode,
    )
    score_row = {
        "id": perturbed["id"],
        "temperature": responses["temperature"],
        "answer": answer,
        "reference": perturbed["answer"],
        "correct": bool(correct),
        "measures": {
            name: {"value": res.value, "per_bootstrap": res.per_bootstrap}
            for name, res in results.items()
        },
    }
    embedding_row = {
        "id": perturbed["id"],
        "temperature": responses["temperature"],
        "question_vectors": [_encode_vector(v) for v in question_vectors],
        "response_vectors": [
            [_encode_vector(v) for v in state] for state in response_vectors
        ],
    }
    return score_row, embedding_row


def stage_score(
    config: RunConfig, paths: StagePaths, temperature: float
) -> tuple[list[dict], list[dict]]:
    perturbed = {
        row["id"]: row for row in read_jsonl(_require(paths.perturbations, "perturb"))
    }
    responses = read_jsonl(_require(paths.responses(temperature), "generate"))
    embedder = config.embedding.build()
    judge_provider = config.judge.build() if config.judge else None
    if config.judge_mode == "judge" and judge_provider is None:
        raise InvalidInputError("judge mode needs a judge provider in the config")
    cache = _build_cache(config)

    score_rows, embedding_rows, failures = [], [], []
    for row in responses:
        if row["id"] not in perturbed:
            continue
        try:
            score_row, embedding_row = _score_item(
                perturbed[row["id"]], row, config, embedder, judge_provider, cache
            )
        except ProviderUnavailableError:
            write_jsonl(paths.scores(temperature), score_rows)
            raise
        except InventropyError as exc:
            failures.append({"id": row["id"], "stage": "score", "error": str(exc)})
            continue
        score_rows.append(score_row)
        embedding_rows.append(embedding_row)
    write_jsonl(paths.scores(temperature), score_rows)
    write_jsonl(paths.embeddings(temperature), embedding_rows)
    _append_failures(paths, failures)
    return score_rows, failures


# ---------------------------------------------------------------------------
# evaluate / tsu / report
# ---------------------------------------------------------------------------


def eval_records(score_rows: list[dict], measure: str) -> list[EvalRecord]:
    """Uncertainty records for one measure; confidence measures are negated."""
    records = []
    for row in score_rows:
        if measure not in row["measures"]:
            continue
        value = row["measures"][measure]["value"]
        if measure in CONFIDENCE_MEASURES:
            value = -value
        records.append(
            EvalRecord(question_id=row["id"], score=value, correct=row["correct"])
        )
    if not records:
        raise InvalidInputError(f"no scores found for measure {measure!r}")
    return records


def stage_evaluate(
    config: RunConfig,
    paths: StagePaths,
    temperature: float,
    resamples: int = 40,
) -> dict:
    score_rows = read_jsonl(_require(paths.scores(temperature), "score"))
    seed = stable_u64(config.seed, "evaluate", t_key(temperature))
    summary: dict = {"temperature": temperature, "n_items": len(score_rows), "measures": {}}
    curve_lines = ["measure,rejection_fraction,error_rate,oracle_error_rate,random_error_rate"]
    for measure in config.measures:
        records = eval_records(score_rows, measure)
        block: dict = {}
        for metric_name, metric in (
            ("auroc", auroc),
            ("prr", prr),
            ("brier", lambda recs: brier(recs, isotonic_fit(recs))),
        ):
            mean, stddev = bootstrap_statistic(records, metric, resamples=resamples, seed=seed)
            block[metric_name] = {
                "mean": mean,
                "stddev": stddev,
                "point": metric(records),
            }
        summary["measures"][measure] = block
        for point in rejection_curve(records):
            curve_lines.append(
                f"{measure},{point['rejection_fraction']:.6f},{point['error_rate']:.6f},"
                f"{point['oracle_error_rate']:.6f},{point['random_error_rate']:.6f}"
            )
    paths.summary.write_text(
        json.dumps(summary, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    paths.curves.write_text("\n".join(curve_lines) + "\n", encoding="utf-8")
    return summary


def stage_tsu(config: RunConfig, paths: StagePaths, temperatures: list[float]) -> dict:
    if len(temperatures) < 2:
        raise InvalidInputError("tsu needs at least two temperatures")
    per_temperature: dict[float, dict[str, dict]] = {}
    for temperature in temperatures:
        if not paths.scores(temperature).exists():
            if not paths.responses(temperature).exists():
                raise MissingArtifactError(paths.responses(temperature), "generate")
            stage_score(config, paths, temperature)
        per_temperature[temperature] = {
            row["id"]: row for row in read_jsonl(paths.scores(temperature))
        }

    shared_ids = sorted(
        set.intersection(*(set(rows) for rows in per_temperature.values()))
    )
    if not shared_ids:
        raise InvalidInputError("no items scored at every requested temperature")

    tables: dict[str, dict[str, float]] = {}
    csv_lines = ["measure,window,fraction,percent"]
    for measure in config.measures:
        series = []
        for item_id in shared_ids:
            scores = {}
            for temperature in temperatures:
                value = per_temperature[temperature][item_id]["measures"][measure]["value"]
                if measure in CONFIDENCE_MEASURES:
                    value = -value
                scores[temperature] = value
            series.append(TemperatureSeries(question_id=item_id, scores=scores))
        table = tsu_table(series, temperatures)
        tables[measure] = table
        for label, fraction in table.items():
            csv_lines.append(f"{measure},{label},{fraction:.6f},{100 * fraction:.2f}")

    payload = {"temperatures": temperatures, "n_items": len(shared_ids), "tsu": tables}
    paths.tsu_json.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    paths.tsu_csv.write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    return payload


def stage_report(paths: StagePaths) -> str:
    """Assemble a human-readable summary of whatever artifacts exist."""
    lines = ["# Uncertainty evaluation report", ""]
    if paths.summary.exists():
        summary = json.loads(paths.summary.read_text(encoding="utf-8"))
        lines.append(f"Items: {summary.get('n_items')}  temperature: {summary.get('temperature')}")
        lines.append("")
        lines.append("| measure | AUROC | PRR | Brier |")
        lines.append("|---|---|---|---|")
        for measure, block in sorted(summary.get("measures", {}).items()):
            cells = []
            for metric in ("auroc", "prr", "brier"):
                stats = block[metric]
                cells.append(f"{stats['mean']:.3f} +- {stats['stddev']:.3f}")
            lines.append(f"| {measure} | {cells[0]} | {cells[1]} | {cells[2]} |")
        lines.append("")
    if paths.tsu_json.exists():
        payload = json.loads(paths.tsu_json.read_text(encoding="utf-8"))
        windows = sorted({w for table in payload["tsu"].values() for w in table})
        lines.append("| measure | " + " | ".join(windows) + " |")
        lines.append("|" + "---|" * (len(windows) + 1))
        for measure, table in sorted(payload["tsu"].items()):
            cells = [f"{100 * table[w]:.2f}" if w in table else "-" for w in windows]
            lines.append(f"| {measure} | " + " | ".join(cells) + " |")
        lines.append("")
    if not paths.summary.exists() and not paths.tsu_json.exists():
        raise MissingArtifactError(paths.summary, "evaluate")
    text = "\n".join(lines)
    (paths.root / "report.md").write_text(text, encoding="utf-8")
    return text


def _append_failures(paths: StagePaths, failures: list[dict]) -> None:
    if not failures:
        return
    with paths.failures.open("a", encoding="utf-8") as handle:
        for failure in failures:
            handle.write(dump_row(failure) + "\n")


# ---------------------------------------------------------------------------
# end-to-end
# ---------------------------------------------------------------------------


def run_uq(
    items: list[DatasetItem],
    config: RunConfig,
    stage_dir=None,
    evaluate: bool = True,
) -> UncertaintyReport:
    """Run the whole framework over a dataset and assemble the report.

    Perturbs once, then generates, scores and (optionally) evaluates at
    every configured temperature.  All randomness derives from the config
    seed, so two runs with the same inputs produce byte-identical reports.
    """
    items = items[: config.max_items]
    paths = StagePaths(stage_dir if stage_dir is not None else config.stage_dir)
    report = UncertaintyReport()

    perturb_rows, failures = stage_perturb(items, config, paths)
    report.failures.extend(failures)
    for temperature in config.temperatures:
        _, failures = stage_generate(config, paths, temperature)
        report.failures.extend(failures)
        _, failures = stage_score(config, paths, temperature)
        report.failures.extend(failures)

    scored: dict[str, dict] = {}
    for temperature in config.temperatures:
        for row in read_jsonl(paths.scores(temperature)):
            scored.setdefault(row["id"], {})[t_key(temperature)] = row
    responses: dict[str, dict] = {}
    for temperature in config.temperatures:
        for row in read_jsonl(paths.responses(temperature)):
            responses.setdefault(row["id"], {})[t_key(temperature)] = row

    for row in perturb_rows:
        item_id = row["id"]
        if item_id not in scored:
            continue
        entry = {
            "id": item_id,
            "question": row["question"],
            "reference": row["answer"],
            "perturbations": row["perturbations"],
            "temperatures": {},
        }
        for key, score_row in sorted(scored[item_id].items()):
            response_row = responses[item_id][key]
            entry["temperatures"][key] = {
                "answer": score_row["answer"],
                "correct": score_row["correct"],
                "measures": score_row["measures"],
                "responses": [
                    [rep["cleaned"] for rep in state["replicates"]]
                    for state in sorted(response_row["states"], key=lambda s: s["index"])
                ],
            }
        report.rows.append(entry)

    if evaluate and report.rows:
        try:
            report.summary = stage_evaluate(config, paths, config.temperatures[0])
        except (InvalidInputError, InventropyError) as exc:
            logger.warning("evaluation skipped: %s", exc)
            report.summary = {"skipped": str(exc)}

    paths.report.write_text(report.to_json() + "\n", encoding="utf-8")
    return report
