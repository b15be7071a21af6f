"""Evaluation metrics over (uncertainty score, correctness) records.

Correctness-based metrics (AUROC, PRR, isotonic-normalised Brier) rank
records by confidence = -score, so any uncertainty measure plugs in
uniformly; confidence-flavoured measures are negated upstream.  The
temperature-sensitivity metric needs no correctness labels at all: it is
the fraction of questions whose uncertainty strictly increases along an
ordered temperature ladder.

Ties are handled explicitly everywhere: AUROC gives half credit
(Mann-Whitney convention) and the rejection curves behind PRR average over
all orderings of tied records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import (
    IncompleteSeriesError,
    InvalidInputError,
    UndefinedMetricError,
    UnstableMetricError,
)


@dataclass(frozen=True)
class EvalRecord:
    question_id: str
    score: float
    correct: bool

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise InvalidInputError(f"non-finite score for {self.question_id!r}")

    @property
    def confidence(self) -> float:
        return -self.score


def _split(records: Sequence[EvalRecord]) -> tuple[np.ndarray, np.ndarray]:
    if not records:
        raise UndefinedMetricError("no records")
    conf = np.array([r.confidence for r in records], dtype=float)
    labels = np.array([bool(r.correct) for r in records])
    if labels.all() or not labels.any():
        raise UndefinedMetricError("metric needs both correct and incorrect records")
    return conf, labels


def auroc(records: Sequence[EvalRecord]) -> float:
    """Probability a random (correct, incorrect) pair is ranked right.

    Equivalent to the Mann-Whitney U normalisation: ranks are computed on
    confidence with average ranks for ties, so tied pairs count one half.
    """
    conf, labels = _split(records)
    ranks = rankdata(conf)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _tie_blocks(records: Sequence[EvalRecord]) -> list[tuple[int, int]]:
    """(size, errors) per tied-uncertainty block, most uncertain first."""
    order = sorted(records, key=lambda r: -r.score)
    blocks: list[tuple[int, int]] = []
    idx = 0
    while idx < len(order):
        j = idx
        errors = 0
        while j < len(order) and order[j].score == order[idx].score:
            errors += 0 if order[j].correct else 1
            j += 1
        blocks.append((j - idx, errors))
        idx = j
    return blocks


def _expected_rejected_errors(blocks: list[tuple[int, int]], k: int) -> float:
    """Expected errors among the k most-uncertain records, ties averaged.

    Within a tied block the rejected subset is exchangeable, so the expected
    error count of a partial block is its error rate times the rejected
    fraction.
    """
    rejected = 0.0
    remaining = k
    for size, errors in blocks:
        if remaining <= 0:
            break
        take = min(size, remaining)
        rejected += errors * (take / size)
        remaining -= take
    return rejected


def _rejection_rates(records: Sequence[EvalRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Error rate of the retained set at each rejection count 0..N-1.

    Returns (by uncertainty, by oracle, random baseline) curves.
    """
    n = len(records)
    total_errors = sum(0 if r.correct else 1 for r in records)
    blocks = _tie_blocks(records)
    uq = np.empty(n)
    oracle = np.empty(n)
    for k in range(n):
        retained = n - k
        uq[k] = (total_errors - _expected_rejected_errors(blocks, k)) / retained
        oracle[k] = max(0, total_errors - k) / retained
    random = np.full(n, total_errors / n)
    return uq, oracle, random


def prr(records: Sequence[EvalRecord]) -> float:
    """Prediction rejection ratio over error-rate-vs-rejection curves.

    (area between the random baseline and the uncertainty-ordered curve)
    divided by (area between the baseline and the oracle curve).  Oracle
    ordering scores exactly 1; uninformative scores give 0 in expectation.

    The construction is fixed here because the literature leaves details
    open; numbers are comparable run to run, not necessarily elsewhere.
    """
    _split(records)  # raises on single-class input
    uq, oracle, random = _rejection_rates(records)
    auc_uq = float(uq.mean())
    auc_oracle = float(oracle.mean())
    auc_random = float(random.mean())
    denom = auc_random - auc_oracle
    if denom <= 0.0:
        raise UndefinedMetricError("oracle rejection area is zero")
    return (auc_random - auc_uq) / denom


def rejection_curve(records: Sequence[EvalRecord]) -> list[dict]:
    """Plot-ready rejection curve rows (fraction, uq, oracle, random)."""
    n = len(records)
    uq, oracle, random = _rejection_rates(records)
    return [
        {
            "rejection_fraction": k / n,
            "error_rate": float(uq[k]),
            "oracle_error_rate": float(oracle[k]),
            "random_error_rate": float(random[k]),
        }
        for k in range(n)
    ]


@dataclass(frozen=True)
class IsotonicModel:
    """Stepwise non-decreasing map from confidence to [0, 1].

    ``thresholds`` holds each pooled block's smallest confidence; inputs at
    or above a threshold take that block's fitted value, and inputs below
    every threshold extrapolate flat to the first value.
    """

    thresholds: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) != len(self.values) or not self.values:
            raise InvalidInputError("model needs matching thresholds and values")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise InvalidInputError("fitted values must be non-decreasing")
        if min(self.values) < 0.0 or max(self.values) > 1.0:
            raise InvalidInputError("fitted values must lie in [0, 1]")


def isotonic_fit(records: Sequence[EvalRecord]) -> IsotonicModel:
    """Pool-adjacent-violators regression of correctness on confidence."""
    if len(records) < 2:
        raise InvalidInputError("isotonic fit needs at least two records")
    pairs = sorted((r.confidence, 1.0 if r.correct else 0.0) for r in records)

    # Merge equal confidences first so the fit is a function of confidence,
    # then pool adjacent violators left to right.
    blocks: list[list[float]] = []  # [threshold, weight, value]
    for conf, label in pairs:
        if blocks and blocks[-1][0] == conf:
            t, w, v = blocks[-1]
            blocks[-1] = [t, w + 1.0, (v * w + label) / (w + 1.0)]
        else:
            blocks.append([conf, 1.0, label])
        while len(blocks) > 1 and blocks[-2][2] > blocks[-1][2]:
            t1, w1, v1 = blocks[-2]
            t2, w2, v2 = blocks[-1]
            blocks[-2:] = [[t1, w1 + w2, (v1 * w1 + v2 * w2) / (w1 + w2)]]

    return IsotonicModel(
        thresholds=tuple(b[0] for b in blocks),
        values=tuple(b[2] for b in blocks),
    )


def isotonic_apply(model: IsotonicModel, confidence) -> np.ndarray | float:
    """Evaluate the stepwise map, flat beyond both extremes."""
    conf = np.asarray(confidence, dtype=float)
    idx = np.searchsorted(model.thresholds, conf, side="right") - 1
    idx = np.clip(idx, 0, len(model.values) - 1)
    out = np.asarray(model.values, dtype=float)[idx]
    return float(out) if np.isscalar(confidence) or conf.ndim == 0 else out


def brier(records: Sequence[EvalRecord], model: IsotonicModel) -> float:
    """Mean squared gap between normalised confidence and correctness."""
    if not records:
        raise InvalidInputError("no records")
    conf = np.array([r.confidence for r in records])
    labels = np.array([1.0 if r.correct else 0.0 for r in records])
    pred = isotonic_apply(model, conf)
    return float(np.mean((pred - labels) ** 2))


@dataclass(frozen=True)
class TemperatureSeries:
    """Uncertainty of one question across sampling temperatures."""

    question_id: str
    scores: Mapping[float, float]

    def __post_init__(self):
        if len(self.scores) < 2:
            raise InvalidInputError(
                f"series {self.question_id!r} needs at least two temperatures"
            )


def tsu(series: Sequence[TemperatureSeries], temperatures: Sequence[float]) -> float:
    """Fraction of questions strictly increasing along the temperature ladder.

    Strict inequalities throughout: a tie at any adjacent pair makes that
    question contribute zero.  Reported as a fraction; presentation layers
    multiply by 100.
    """
    temps = list(temperatures)
    if len(temps) < 2 or any(b <= a for a, b in zip(temps, temps[1:])):
        raise InvalidInputError("temperatures must be strictly increasing, >= 2 of them")
    if not series:
        raise InvalidInputError("no series")
    missing = [
        s.question_id for s in series if any(t not in s.scores for t in temps)
    ]
    if missing:
        absent = next(
            t for s in series for t in temps if t not in s.scores
        )
        raise IncompleteSeriesError(missing, absent)
    hits = 0
    for s in series:
        values = [s.scores[t] for t in temps]
        if all(b > a for a, b in zip(values, values[1:])):
            hits += 1
    return hits / len(series)


def _t_label(t: float) -> str:
    return f"{t:.1f}" if float(t).is_integer() else f"{t:g}"


def tsu_table(
    series: Sequence[TemperatureSeries], temperatures: Sequence[float]
) -> dict[str, float]:
    """TSU for every temperature pair and every contiguous run of >= 3."""
    temps = list(temperatures)
    table: dict[str, float] = {}
    for i in range(len(temps)):
        for j in range(i + 1, len(temps)):
            label = f"TSU({_t_label(temps[i])},{_t_label(temps[j])})"
            table[label] = tsu(series, [temps[i], temps[j]])
    for width in range(3, len(temps) + 1):
        for start in range(len(temps) - width + 1):
            window = temps[start : start + width]
            label = f"TSU({_t_label(window[0])}-{_t_label(window[-1])})"
            table[label] = tsu(series, window)
    return table


MAX_RESAMPLE_RETRIES = 100


def bootstrap_statistic(
    records: Sequence[EvalRecord],
    metric: Callable[[Sequence[EvalRecord]], float],
    resamples: int = 40,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean and standard deviation of a metric over bootstrap resamples.

    Each resample draws len(records) records with replacement from its own
    seeded substream.  Resamples on which the metric is undefined (e.g. a
    single-class draw) are redrawn a bounded number of times.
    """
    if not records:
        raise InvalidInputError("no records")
    if resamples < 1:
        raise InvalidInputError("resamples must be >= 1")
    n = len(records)
    values = []
    for i in range(resamples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        for _ in range(MAX_RESAMPLE_RETRIES):
            picks = rng.integers(0, n, size=n)
            sample = [records[j] for j in picks]
            try:
                values.append(metric(sample))
                break
            except UndefinedMetricError:
                continue
        else:
            raise UnstableMetricError(
                f"metric undefined on {MAX_RESAMPLE_RETRIES} consecutive "
                f"redraws of resample {i}"
            )
    return float(np.mean(values)), float(np.std(values))
