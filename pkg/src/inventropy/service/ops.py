"""Service operations: one plain function per endpoint.

The FastAPI routes and the CLI's in-process backend both dispatch here, so
behaviour is identical whether a request travels over HTTP or not.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..gaap import GaapConfig, SubstitutionLexicon, build_perturbation_set, evolve
from ..measures import BootstrapPlan, bootstrap_measures
from ..metrics import (
    EvalRecord,
    TemperatureSeries,
    auroc,
    bootstrap_statistic,
    brier,
    isotonic_fit,
    prr,
    tsu_table,
)
from ..pipeline import t_key
from ..providers import GenerationRequest, clean_response, embed_texts, generate
from ..similarity import build_affinity_matrix
from ..tangent import linear_pair, quadratic_bowl, rippled_linear, sigma_sweep
from ..walks import row_normalize
from . import models


def affinity(request: models.AffinityRequest) -> models.AffinityResponse:
    matrix = build_affinity_matrix(np.asarray(request.vectors, dtype=float))
    return models.AffinityResponse(
        matrix=matrix.tolist(), transition=row_normalize(matrix).tolist()
    )


def score(request: models.ScoreRequest) -> models.ScoreResponse:
    input_vectors = np.asarray(request.input_vectors, dtype=float)
    response_vectors = np.asarray(request.response_vectors, dtype=float)
    a_x = build_affinity_matrix(input_vectors)
    plan = BootstrapPlan(count=request.bootstrap.count, seed=request.bootstrap.seed)
    results = bootstrap_measures(a_x, response_vectors, plan, measures=request.measures)
    return models.ScoreResponse(
        measures={
            name: models.MeasureResultModel(value=res.value, per_bootstrap=res.per_bootstrap)
            for name, res in results.items()
        }
    )


def perturb(request: models.PerturbRequest) -> models.PerturbResponse:
    if request.lexicon_path:
        lexicon = SubstitutionLexicon.from_path(request.lexicon_path)
    elif request.lexicon:
        lexicon = SubstitutionLexicon(request.lexicon)
    else:
        raise InvalidInputError("perturb needs lexicon records or a lexicon_path")
    config = GaapConfig(seed=request.seed, **request.config.model_dump())
    embedder = request.fitness_embedder.build()
    rng = np.random.default_rng(config.seed)
    result = evolve(request.question, config, lexicon, embedder, rng=rng)
    pset = build_perturbation_set(result, config, rng, original=request.question)
    return models.PerturbResponse(
        original=pset.original,
        perturbations=pset.texts,
        termination=result.termination,
        generations=len(result.generations),
    )


def generate_batch(request: models.GenerateRequest) -> models.GenerateResponse:
    provider = request.provider.build()
    items = []
    for item in request.items:
        states = []
        for prompt in item.prompts:
            replicates = []
            for replicate in range(request.replicates):
                raw = generate(
                    GenerationRequest(
                        model=request.provider.model,
                        prompt=prompt,
                        temperature=request.temperature,
                        replicate=replicate,
                        seed=request.seed,
                    ),
                    provider,
                    retries=request.retries,
                )
                cleaned = clean_response(raw, question=prompt) if request.clean else raw
                replicates.append({"raw": raw, "cleaned": cleaned})
            states.append(models.GeneratedState(prompt=prompt, replicates=replicates))
        items.append(models.GeneratedItem(id=item.id, states=states))
    return models.GenerateResponse(items=items)


def embed(request: models.EmbedRequest) -> models.EmbedResponse:
    provider = request.provider.build()
    vectors = embed_texts(request.texts, provider, model=request.provider.model)
    return models.EmbedResponse(vectors=vectors.tolist())


def evaluate(request: models.EvaluateRequest) -> models.EvaluateResponse:
    records = [
        EvalRecord(question_id=r.id, score=r.score, correct=r.correct)
        for r in request.records
    ]
    stats = {}
    for name, metric in (
        ("auroc", auroc),
        ("prr", prr),
        ("brier", lambda recs: brier(recs, isotonic_fit(recs))),
    ):
        mean, stddev = bootstrap_statistic(
            records, metric, resamples=request.resamples, seed=request.seed
        )
        stats[name] = models.MetricStats(mean=mean, stddev=stddev, point=metric(records))
    return models.EvaluateResponse(n_records=len(records), **stats)


def tsu(request: models.TsuRequest) -> models.TsuResponse:
    series = [
        TemperatureSeries(
            question_id=s.id,
            scores={t: s.scores[t_key(t)] for t in request.temperatures if t_key(t) in s.scores},
        )
        for s in request.series
    ]
    table = tsu_table(series, request.temperatures)
    return models.TsuResponse(tsu=table, n_items=len(series))


_PRESETS = {
    "linear": lambda req: linear_pair(req.angle_deg, dim=2),
    "quadratic": lambda req: quadratic_bowl(),
    "rippled": lambda req: rippled_linear(),
}


def tangent_check(request: models.TangentRequest) -> models.TangentResponse:
    if request.preset not in _PRESETS:
        raise InvalidInputError(
            f"unknown preset {request.preset!r}; pick one of {sorted(_PRESETS)}"
        )
    f_star, f_hat = _PRESETS[request.preset](request)
    dim = 2 if request.preset == "linear" else 3
    rows = sigma_sweep(
        f_star,
        f_hat,
        np.zeros(dim),
        request.sigmas,
        samples=request.samples,
        seed=request.seed,
    )
    return models.TangentResponse(rows=[models.TangentRow(**row) for row in rows])


def clean(request: models.CleanRequest) -> models.CleanResponse:
    cleaned = clean_response(request.raw, question=request.question)
    return models.CleanResponse(cleaned=cleaned, empty=not cleaned)
