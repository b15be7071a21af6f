import itertools
import math

import numpy as np
import pytest

from inventropy.errors import (
    IncompleteSeriesError,
    InvalidInputError,
    UndefinedMetricError,
    UnstableMetricError,
)
from inventropy.metrics import (
    EvalRecord,
    TemperatureSeries,
    auroc,
    bootstrap_statistic,
    brier,
    isotonic_apply,
    isotonic_fit,
    prr,
    rejection_curve,
    tsu,
    tsu_table,
)


def records_from(scores, labels):
    return [
        EvalRecord(question_id=f"q{i}", score=float(s), correct=bool(c))
        for i, (s, c) in enumerate(zip(scores, labels))
    ]


# -- independent oracles -----------------------------------------------------


def auroc_bruteforce(records):
    pos = [r.confidence for r in records if r.correct]
    neg = [r.confidence for r in records if not r.correct]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def prr_bruteforce(records):
    """Average the rejection curve over every ordering consistent with ties."""
    n = len(records)
    errors = np.array([0.0 if r.correct else 1.0 for r in records])
    total_errors = errors.sum()
    order = sorted(range(n), key=lambda i: -records[i].score)
    groups = []
    for _, group in itertools.groupby(order, key=lambda i: records[i].score):
        groups.append(list(group))

    curves = []
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        flat = [i for block in perm for i in block]
        rates = []
        for k in range(n):
            retained = flat[k:]
            rates.append(errors[retained].sum() / len(retained))
        curves.append(rates)
    uq_curve = np.mean(curves, axis=0)
    oracle = [max(0.0, total_errors - k) / (n - k) for k in range(n)]
    auc_uq = uq_curve.mean()
    auc_oracle = float(np.mean(oracle))
    auc_random = total_errors / n
    return (auc_random - auc_uq) / (auc_random - auc_oracle)


# -- auroc -------------------------------------------------------------------


def test_auroc_perfect_separation():
    # confidences (0.9, 0.8) correct vs (0.2, 0.1) incorrect
    records = records_from([-0.9, -0.8, -0.2, -0.1], [1, 1, 0, 0])
    assert auroc(records) == pytest.approx(1.0)


def test_auroc_pair_counting_example():
    records = records_from([-0.9, -0.4, -0.6, -0.2], [1, 1, 0, 0])
    assert auroc(records) == pytest.approx(0.75)


def test_auroc_all_ties():
    records = records_from([0.5] * 6, [1, 0, 1, 0, 1, 0])
    assert auroc(records) == pytest.approx(0.5)


def test_auroc_single_class_undefined():
    with pytest.raises(UndefinedMetricError):
        auroc(records_from([0.1, 0.2], [1, 1]))


def test_auroc_matches_bruteforce_on_random_instances():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        labels = rng.integers(0, 2, size=n)
        if labels.all() or not labels.any():
            labels[0] = 1 - labels[0]
        scores = rng.integers(0, 5, size=n).astype(float)
        records = records_from(scores, labels)
        assert auroc(records) == auroc_bruteforce(records)


def test_auroc_rank_invariance():
    rng = np.random.default_rng(22)
    scores = rng.normal(size=10)
    labels = [1, 0] * 5
    base = auroc(records_from(scores, labels))
    transformed = auroc(records_from(np.exp(scores) * 3 + 1, labels))
    assert transformed == pytest.approx(base, abs=1e-12)


def test_auroc_negation_and_flip_symmetry():
    rng = np.random.default_rng(23)
    scores = rng.normal(size=8)
    labels = [1, 1, 0, 1, 0, 0, 1, 0]
    base = auroc(records_from(scores, labels))
    flipped = auroc(records_from(-scores, [1 - l for l in labels]))
    assert flipped == pytest.approx(base, abs=1e-12)


# -- prr ---------------------------------------------------------------------


def test_prr_oracle_ordering_is_one():
    # every incorrect record strictly more uncertain than every correct one
    records = records_from([1.0, 2.0, 5.0, 6.0], [1, 1, 0, 0])
    assert prr(records) == pytest.approx(1.0, abs=1e-12)


def test_prr_uninformative_scores_zero():
    records = records_from([3.0] * 6, [1, 0, 1, 0, 1, 0])
    assert prr(records) == pytest.approx(0.0, abs=1e-12)


def test_prr_matches_bruteforce_on_random_instances():
    rng = np.random.default_rng(24)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        labels = rng.integers(0, 2, size=n)
        if labels.all() or not labels.any():
            labels[0] = 1 - labels[0]
        scores = rng.integers(0, 5, size=n).astype(float)
        records = records_from(scores, labels)
        assert prr(records) == pytest.approx(prr_bruteforce(records), abs=1e-12)


def test_prr_invariance_under_increasing_transform():
    rng = np.random.default_rng(25)
    scores = rng.normal(size=9)
    labels = [1, 0, 1, 1, 0, 1, 0, 0, 1]
    base = prr(records_from(scores, labels))
    transformed = prr(records_from(np.tanh(scores) * 7, labels))
    assert transformed == pytest.approx(base, abs=1e-12)


def test_prr_single_class_undefined():
    with pytest.raises(UndefinedMetricError):
        prr(records_from([1.0, 2.0], [0, 0]))


def test_rejection_curve_shape():
    records = records_from([1.0, 2.0, 3.0, 4.0], [1, 0, 1, 0])
    rows = rejection_curve(records)
    assert len(rows) == 4
    assert rows[0]["rejection_fraction"] == 0.0
    assert rows[0]["error_rate"] == pytest.approx(0.5)
    assert rows[0]["random_error_rate"] == pytest.approx(0.5)


# -- isotonic + brier --------------------------------------------------------


def test_isotonic_monotone_data_unchanged():
    records = records_from([-0.1, -0.2, -0.3, -0.4], [0, 0, 1, 1])
    # confidences 0.1 < 0.2 < 0.3 < 0.4 with labels 0,0,1,1: no violations
    model = isotonic_fit(records)
    assert model.values == (0.0, 1.0)
    assert isotonic_apply(model, 0.15) == 0.0
    assert isotonic_apply(model, 0.35) == 1.0


def test_isotonic_pools_violating_pair():
    records = records_from([-0.4, -0.6], [1, 0])
    model = isotonic_fit(records)
    assert model.values == (0.5,)
    assert isotonic_apply(model, 0.4) == 0.5
    assert isotonic_apply(model, 0.6) == 0.5


def test_isotonic_constant_labels():
    records = records_from([-0.2, -0.5, -0.9], [1, 1, 1])
    model = isotonic_fit(records)
    assert set(model.values) == {1.0}


def test_isotonic_apply_is_nondecreasing_and_flat_outside():
    rng = np.random.default_rng(26)
    records = records_from(rng.normal(size=20), rng.integers(0, 2, size=20))
    model = isotonic_fit(records)
    grid = np.linspace(-5, 5, 101)
    values = isotonic_apply(model, grid)
    assert np.all(np.diff(values) >= 0.0)
    assert values[0] == model.values[0]
    assert values[-1] == model.values[-1]


def test_brier_on_pooled_pair():
    records = records_from([-0.4, -0.6], [1, 0])
    model = isotonic_fit(records)
    # both pooled to 0.5: contributions (0.5-1)^2 and (0.5-0)^2
    assert brier(records, model) == pytest.approx(0.25)


def test_brier_separable_data_zero():
    records = records_from([-0.1, -0.2, -0.8, -0.9], [0, 0, 1, 1])
    model = isotonic_fit(records)
    assert brier(records, model) == pytest.approx(0.0)


def test_brier_constant_half_on_balanced_labels():
    records = records_from([0.0, 0.0, 0.0, 0.0], [1, 0, 1, 0])
    model = isotonic_fit(records)
    assert brier(records, model) == pytest.approx(0.25)


# -- tsu ---------------------------------------------------------------------


def series_from(table):
    return [
        TemperatureSeries(question_id=qid, scores=scores) for qid, scores in table.items()
    ]


def test_tsu_all_increasing():
    series = series_from(
        {"a": {0.3: 0.1, 0.7: 0.2, 1.0: 0.5}, "b": {0.3: 1.0, 0.7: 1.5, 1.0: 2.0}}
    )
    assert tsu(series, [0.3, 0.7, 1.0]) == 1.0


def test_tsu_tie_contributes_zero():
    series = series_from({"a": {0.3: 0.2, 0.7: 0.2}, "b": {0.3: 0.1, 0.7: 0.4}})
    assert tsu(series, [0.3, 0.7]) == 0.5


def test_tsu_three_of_four():
    table = {
        "a": {0.7: 1.0, 1.0: 2.0, 1.4: 3.0},
        "b": {0.7: 0.5, 1.0: 0.6, 1.4: 0.7},
        "c": {0.7: 2.0, 1.0: 2.5, 1.4: 2.6},
        "d": {0.7: 1.0, 1.0: 0.9, 1.4: 1.5},
    }
    assert tsu(series_from(table), [0.7, 1.0, 1.4]) == 0.75


def test_tsu_missing_temperature_lists_questions():
    series = series_from({"a": {0.3: 0.1, 0.7: 0.2}, "b": {0.3: 0.1, 1.0: 0.2}})
    with pytest.raises(IncompleteSeriesError) as err:
        tsu(series, [0.3, 0.7])
    assert "b" in err.value.question_ids


def test_tsu_requires_increasing_temperatures():
    series = series_from({"a": {0.3: 0.1, 0.7: 0.2}})
    with pytest.raises(InvalidInputError):
        tsu(series, [0.7, 0.3])


def test_tsu_invariant_under_increasing_transform():
    rng = np.random.default_rng(27)
    temps = [0.3, 0.7, 1.0, 1.4]
    table = {
        f"q{i}": {t: float(rng.normal()) for t in temps} for i in range(12)
    }
    base = tsu(series_from(table), temps)
    warped = {
        qid: {t: math.exp(v) for t, v in scores.items()} for qid, scores in table.items()
    }
    assert tsu(series_from(warped), temps) == base


def test_tsu_table_windows():
    temps = [0.3, 0.7, 1.0, 1.4]
    series = series_from({"a": {t: i for i, t in enumerate(temps)}})
    table = tsu_table(series, temps)
    assert table["TSU(0.3,0.7)"] == 1.0
    assert table["TSU(0.3-1.4)"] == 1.0
    assert "TSU(0.7-1.4)" in table and "TSU(0.3-1.0)" in table
    assert len(table) == 6 + 3  # all pairs plus contiguous windows of 3 and 4


# -- bootstrap statistics ----------------------------------------------------


def test_bootstrap_statistic_constant_metric():
    records = records_from([1.0, 2.0], [1, 0])
    mean, stddev = bootstrap_statistic(records, lambda recs: 0.7, resamples=40, seed=1)
    assert mean == pytest.approx(0.7)
    assert stddev == 0.0


def test_bootstrap_statistic_single_resample():
    records = records_from([1.0, 2.0, 3.0, 4.0], [1, 1, 0, 0])
    mean, stddev = bootstrap_statistic(records, auroc, resamples=1, seed=3)
    assert stddev == 0.0


def test_bootstrap_statistic_deterministic():
    records = records_from([1.0, 2.0, 3.0, 4.0, 5.0], [1, 0, 1, 0, 1])
    a = bootstrap_statistic(records, auroc, resamples=40, seed=9)
    b = bootstrap_statistic(records, auroc, resamples=40, seed=9)
    assert a == b


def test_bootstrap_statistic_redraws_single_class_resamples():
    records = records_from([1.0, 2.0, 3.0], [1, 1, 0])
    mean, stddev = bootstrap_statistic(records, auroc, resamples=25, seed=4)
    assert 0.0 <= mean <= 1.0


def test_bootstrap_statistic_unstable_metric():
    def always_undefined(recs):
        raise UndefinedMetricError("nope")

    records = records_from([1.0, 2.0], [1, 0])
    with pytest.raises(UnstableMetricError):
        bootstrap_statistic(records, always_undefined, resamples=3, seed=5)
