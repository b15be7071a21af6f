"""Command-line interface: staged pipeline runs plus service utilities.

Subcommands mirror the pipeline stages (perturb, generate, score,
evaluate, tsu, report), with `run` chaining them end to end, `lemma-check`
running the tangent-variance verification and `serve` starting the HTTP
service.  Analysis commands accept ``--server URL`` to delegate the
computation to a running service instead of the local process.

Exit codes: 0 success, 2 configuration/usage error, 3 provider error,
4 partial failure (some items failed but the run completed).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import RunConfig, apply_stub_mode, load_config
from .datasets import ingest_dataset
from .errors import (
    InvalidInputError,
    InventropyError,
    MissingArtifactError,
    ProviderConfigError,
    ProviderUnavailableError,
)
from .measures import CONFIDENCE_MEASURES
from .pipeline import (
    StagePaths,
    read_jsonl,
    run_uq,
    stage_evaluate,
    stage_generate,
    stage_perturb,
    stage_report,
    stage_score,
    stage_tsu,
    t_key,
)
from .service import make_backend
from .service import models as api

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_PARTIAL = 4


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"bad float list {text!r}") from exc


def _load_run_config(args) -> RunConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "temperature", None):
        overrides["temperatures"] = _parse_floats(args.temperature)
    if getattr(args, "measures", None):
        overrides["measures"] = [m.strip() for m in args.measures.split(",") if m.strip()]
    if getattr(args, "perturb_mode", None):
        overrides["perturb_mode"] = args.perturb_mode
    if getattr(args, "stage_dir", None):
        overrides["stage_dir"] = args.stage_dir
    if getattr(args, "cache_dir", None):
        overrides["cache_dir"] = args.cache_dir
    if getattr(args, "lexicon", None):
        overrides.setdefault("gaap", {})
    if args.config:
        config = load_config(args.config, overrides)
    else:
        try:
            config = RunConfig(**overrides)
        except ValidationError as exc:
            raise InvalidInputError(str(exc)) from exc
    if getattr(args, "lexicon", None):
        gaap = config.gaap.model_copy(update={"lexicon_path": args.lexicon})
        config = config.model_copy(update={"gaap": gaap})
    if getattr(args, "stub", None):
        config = apply_stub_mode(config, args.stub)
    return config


def _items(args, config: RunConfig):
    if not getattr(args, "dataset", None):
        raise InvalidInputError("--dataset is required for this command")
    return ingest_dataset(args.dataset, limit=config.max_items)


def _paths(config: RunConfig) -> StagePaths:
    return StagePaths(config.stage_dir)


def _finish(failures) -> int:
    if failures:
        for failure in failures:
            logger.warning("item %s failed at %s: %s", failure["id"], failure["stage"], failure["error"])
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_perturb(args) -> int:
    config = _load_run_config(args)
    rows, failures = stage_perturb(_items(args, config), config, _paths(config))
    print(f"perturbed {len(rows)} items -> {_paths(config).perturbations}")
    return _finish(failures)


def cmd_generate(args) -> int:
    config = _load_run_config(args)
    paths = _paths(config)
    failures = []
    for temperature in config.temperatures:
        rows, failed = stage_generate(config, paths, temperature)
        failures.extend(failed)
        print(f"generated {len(rows)} items at T={t_key(temperature)} -> {paths.responses(temperature)}")
    return _finish(failures)


def cmd_score(args) -> int:
    config = _load_run_config(args)
    paths = _paths(config)
    failures = []
    for temperature in config.temperatures:
        rows, failed = stage_score(config, paths, temperature)
        failures.extend(failed)
        print(f"scored {len(rows)} items at T={t_key(temperature)} -> {paths.scores(temperature)}")
    return _finish(failures)


def cmd_evaluate(args) -> int:
    config = _load_run_config(args)
    paths = _paths(config)
    temperature = config.temperatures[0]
    if args.server:
        summary = _evaluate_remote(args, config, paths, temperature)
    else:
        summary = stage_evaluate(config, paths, temperature, resamples=args.resamples)
    for measure, block in sorted(summary["measures"].items()):
        line = ", ".join(
            f"{metric}={block[metric]['mean']:.3f}+-{block[metric]['stddev']:.3f}"
            for metric in ("auroc", "prr", "brier")
        )
        print(f"{measure}: {line}")
    return EXIT_OK


def _evaluate_remote(args, config: RunConfig, paths: StagePaths, temperature: float) -> dict:
    from .pipeline import eval_records

    backend = make_backend(args.server)
    score_path = paths.scores(temperature)
    if not score_path.exists():
        raise MissingArtifactError(score_path, "score")
    rows = read_jsonl(score_path)
    summary: dict = {"temperature": temperature, "n_items": len(rows), "measures": {}}
    for measure in config.measures:
        records = eval_records(rows, measure)
        response = backend.call(
            "evaluate",
            api.EvaluateRequest(
                records=[
                    api.EvalRecordModel(id=r.question_id, score=r.score, correct=r.correct)
                    for r in records
                ],
                resamples=args.resamples,
                seed=config.seed,
            ),
        )
        summary["measures"][measure] = {
            name: getattr(response, name).model_dump() for name in ("auroc", "prr", "brier")
        }
    paths.summary.write_text(
        json.dumps(summary, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    return summary


def cmd_tsu(args) -> int:
    config = _load_run_config(args)
    paths = _paths(config)
    temperatures = _parse_floats(args.temperature) if args.temperature else config.temperatures
    if args.server:
        payload = _tsu_remote(args, config, paths, temperatures)
    else:
        payload = stage_tsu(config, paths, temperatures)
    for measure, table in sorted(payload["tsu"].items()):
        cells = ", ".join(f"{label}={100 * value:.2f}%" for label, value in table.items())
        print(f"{measure}: {cells}")
    return EXIT_OK


def _tsu_remote(args, config: RunConfig, paths: StagePaths, temperatures: list[float]) -> dict:
    backend = make_backend(args.server)
    for temperature in temperatures:
        if not paths.scores(temperature).exists():
            if not paths.responses(temperature).exists():
                raise MissingArtifactError(paths.responses(temperature), "generate")
            stage_score(config, paths, temperature)
    per_temp = {
        t: {row["id"]: row for row in read_jsonl(paths.scores(t))} for t in temperatures
    }
    shared = sorted(set.intersection(*(set(rows) for rows in per_temp.values())))
    tables = {}
    for measure in config.measures:
        sign = -1.0 if measure in CONFIDENCE_MEASURES else 1.0
        series = [
            api.TsuSeriesModel(
                id=item_id,
                scores={
                    t_key(t): sign * per_temp[t][item_id]["measures"][measure]["value"]
                    for t in temperatures
                },
            )
            for item_id in shared
        ]
        response = backend.call(
            "tsu", api.TsuRequest(series=series, temperatures=temperatures)
        )
        tables[measure] = response.tsu
    return {"temperatures": temperatures, "n_items": len(shared), "tsu": tables}


def cmd_lemma_check(args) -> int:
    backend = make_backend(args.server)
    response = backend.call(
        "tangent",
        api.TangentRequest(
            preset=args.preset,
            angle_deg=args.angle,
            sigmas=_parse_floats(args.sigma),
            samples=args.samples,
            seed=args.seed or 0,
        ),
    )
    print(f"{'sigma':>10} {'empirical':>12} {'predicted':>12} {'gap':>12}")
    for row in response.rows:
        print(f"{row.sigma:>10.4f} {row.empirical:>12.6f} {row.predicted:>12.6f} {row.gap:>12.6f}")
    if args.out:
        lines = ["sigma,empirical,predicted,gap"]
        lines += [
            f"{row.sigma},{row.empirical},{row.predicted},{row.gap}" for row in response.rows
        ]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    config = _load_run_config(args)
    print(stage_report(_paths(config)))
    return EXIT_OK


def cmd_run(args) -> int:
    config = _load_run_config(args)
    report = run_uq(_items(args, config), config, stage_dir=config.stage_dir)
    print(f"report: {_paths(config).report} ({len(report.rows)} items)")
    return _finish(report.failures)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inventropy",
        description="Perturbation-based uncertainty quantification for text generators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset: bool = False):
        p.add_argument("--config", help="JSON or YAML run config")
        p.add_argument("--stage-dir", help="directory for stage artifacts")
        p.add_argument("--cache-dir", help="response/embedding cache directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--temperature", help="comma-separated temperatures")
        p.add_argument("--measures", help="comma-separated measure names")
        p.add_argument("--stub", choices=["echo", "canned", "roulette"], help="force offline stub providers")
        if dataset:
            p.add_argument("--dataset", help="dataset JSONL path")

    p = sub.add_parser("perturb", help="build perturbation sets")
    common(p, dataset=True)
    p.add_argument("--perturb-mode", choices=["gaap", "paraphrase", "file"])
    p.add_argument("--lexicon", help="substitution lexicon TSV (gaap mode)")
    p.set_defaults(fn=cmd_perturb)

    p = sub.add_parser("generate", help="query the generator for every perturbation")
    common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("score", help="compute the uncertainty measures")
    common(p)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("evaluate", help="AUROC / PRR / Brier against correctness")
    common(p)
    p.add_argument("--resamples", type=int, default=40)
    p.add_argument("--server", help="delegate computation to a running service")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("tsu", help="temperature sensitivity of uncertainty")
    common(p)
    p.add_argument("--server", help="delegate computation to a running service")
    p.set_defaults(fn=cmd_tsu)

    p = sub.add_parser("lemma-check", help="tangent-set variance verification")
    p.add_argument("--preset", choices=["linear", "quadratic", "rippled"], default="quadratic")
    p.add_argument("--angle", type=float, default=90.0)
    p.add_argument("--sigma", default="0.1,0.05,0.025")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write a plot-ready CSV here")
    p.add_argument("--server", help="delegate computation to a running service")
    p.set_defaults(fn=cmd_lemma_check)

    p = sub.add_parser("report", help="summarise evaluation artifacts")
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("run", help="full pipeline: perturb, generate, score, evaluate")
    common(p, dataset=True)
    p.add_argument("--perturb-mode", choices=["gaap", "paraphrase", "file"])
    p.add_argument("--lexicon", help="substitution lexicon TSV (gaap mode)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ProviderUnavailableError as exc:
        logger.error("provider unavailable: %s", exc)
        return EXIT_PROVIDER
    except (InvalidInputError, MissingArtifactError, ProviderConfigError, ValidationError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except InventropyError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
