"""Uncertainty measures on the dual random walk, plus the bootstrap estimator.

The flagship measure is the unnormalised entropy of the diagonal of the
composite walk P_y @ P_x (natural log, 0*log 0 := 0).  The diagonal entries
p_i = P(x_i | y_i) need not sum to one, so the measure captures both their
dispersion and their magnitude.  Three companions share the machinery:

    ni_entropy  - same entropy on the Bayes-inverted diagonal P(y_i | x_i)
    max_py_x    - max_i P(y_i | x_i), a confidence rather than an uncertainty
    wd_px_py    - exact 1-Wasserstein distance between the X and Y marginals

``bootstrap_measures`` resamples one response per state per bootstrap
replicate, rebuilds P_y and averages each measure across replicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import InvalidInputError, InventropyError
from .similarity import build_affinity_matrix, cosine_affinity
from .walks import (
    check_transition_matrix,
    conditional_x_given_y,
    conditional_y_given_x,
    marginal_x,
    marginal_y,
    row_normalize,
)

MEASURE_NAMES = ("inv_entropy", "ni_entropy", "wd_px_py", "max_py_x")

# Measures whose raw value is a confidence; the evaluation layer negates
# them before ranking so that larger always means more uncertain.
CONFIDENCE_MEASURES = frozenset({"max_py_x"})


def _entropy(p: np.ndarray) -> float:
    """Sum of -p*log(p) with the 0*log(0) = 0 convention (natural log)."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0 + 1e-12):
        raise InvalidInputError("probabilities must lie in [0, 1]")
    mask = p > 0.0
    return float(-(p[mask] * np.log(p[mask])).sum())


def inv_entropy(p_y: np.ndarray, p_x: np.ndarray) -> float:
    """Unnormalised entropy of diag(P_y @ P_x)."""
    diag = np.diag(conditional_x_given_y(p_y, p_x))
    return _entropy(diag)


def ni_entropy(p_y: np.ndarray, p_x: np.ndarray) -> float:
    """Same entropy on the forward (Bayes-derived) diagonal P(y_i | x_i)."""
    diag = np.diag(conditional_y_given_x(p_y, p_x))
    return _entropy(diag)


def max_py_x(p_y: np.ndarray, p_x: np.ndarray) -> float:
    """Largest forward diagonal entry max_i P(y_i | x_i)."""
    diag = np.diag(conditional_y_given_x(p_y, p_x))
    return float(diag.max())


def default_ground_cost(a_x: np.ndarray, a_y: np.ndarray) -> np.ndarray:
    """Dissimilarity cost 1 - (A_x + A_y)/2, clamped to [0, 1], zero diagonal.

    The transport cost between states uses both spaces symmetrically; it is
    injectable in ``wd_px_py`` so experiments can substitute their own.
    """
    a_x = np.asarray(a_x, dtype=float)
    a_y = np.asarray(a_y, dtype=float)
    if a_x.shape != a_y.shape:
        raise InvalidInputError("affinity matrices must share a shape")
    cost = 1.0 - 0.5 * (a_x + a_y)
    cost = np.clip(cost, 0.0, 1.0)
    cost = 0.5 * (cost + cost.T)
    np.fill_diagonal(cost, 0.0)
    return cost


def _check_ground_cost(cost: np.ndarray, n_states: int) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (n_states, n_states):
        raise InvalidInputError("ground cost shape does not match the state count")
    if np.any(cost < 0.0) or not np.all(np.isfinite(cost)):
        raise InvalidInputError("ground cost must be finite and non-negative")
    if not np.allclose(cost, cost.T, atol=1e-12):
        raise InvalidInputError("ground cost must be symmetric")
    if np.any(np.diag(cost) != 0.0):
        raise InvalidInputError("ground cost diagonal must be zero")
    return cost


def wasserstein_exact(p: np.ndarray, q: np.ndarray, cost: np.ndarray) -> float:
    """Exact optimal-transport cost between two distributions on one support.

    Solved as the transportation linear program with the HiGHS solver; the
    state counts here are tiny, so exactness is cheap and lets tests check
    against an independent min-cost-flow oracle.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = p.size
    if q.size != m:
        raise InvalidInputError("distributions must share a support")
    cost = _check_ground_cost(cost, m)
    if abs(p.sum() - 1.0) > 1e-6 or abs(q.sum() - 1.0) > 1e-6:
        raise InvalidInputError("transport endpoints must be probability vectors")

    c = cost.reshape(-1)
    # Row-sum constraints, then column sums with one redundant row dropped.
    a_eq = np.zeros((2 * m - 1, m * m))
    b_eq = np.zeros(2 * m - 1)
    for i in range(m):
        a_eq[i, i * m : (i + 1) * m] = 1.0
        b_eq[i] = p[i]
    for j in range(m - 1):
        a_eq[m + j, j::m] = 1.0
        b_eq[m + j] = q[j]
    res = optimize.linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise InventropyError(f"transport LP failed: {res.message}")
    return max(0.0, float(res.fun))


def wd_px_py(
    p_y: np.ndarray, p_x: np.ndarray, ground_cost: np.ndarray
) -> float:
    """1-Wasserstein distance between the X and Y marginals."""
    p_y = check_transition_matrix(p_y)
    p_x = check_transition_matrix(p_x)
    return wasserstein_exact(marginal_x(p_y, p_x), marginal_y(p_y), ground_cost)


@dataclass(frozen=True)
class BootstrapPlan:
    """How many bootstrap replicates to draw and from which seed."""

    count: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise InvalidInputError("bootstrap count must be >= 1")


@dataclass
class MeasureResult:
    name: str
    value: float
    per_bootstrap: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.per_bootstrap and not np.isclose(
            self.value, float(np.mean(self.per_bootstrap)), atol=1e-12
        ):
            raise InvalidInputError("value must equal the mean of per_bootstrap")


def _replicate_array(responses) -> np.ndarray:
    """Coerce per-state response embeddings into an (n+1, r, d) array."""
    try:
        arr = np.asarray(responses, dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"ragged response embeddings: {exc}") from exc
    if arr.ndim != 3:
        raise InvalidInputError(
            "response embeddings must have shape (states, replicates, dim); "
            "every state needs the same replicate count"
        )
    if arr.shape[1] < 1:
        raise InvalidInputError("need at least one replicate per state")
    return arr


def _bootstrap_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent, schedule-free stream for one bootstrap replicate."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(replicate,)))


def _evaluate(measure: str, a_x, p_x, a_y, p_y) -> float:
    if measure in ("inv_entropy", "nr_inv_entropy"):
        return inv_entropy(p_y, p_x)
    if measure == "ni_entropy":
        return ni_entropy(p_y, p_x)
    if measure == "max_py_x":
        return max_py_x(p_y, p_x)
    if measure == "wd_px_py":
        return wd_px_py(p_y, p_x, default_ground_cost(a_x, a_y))
    raise InvalidInputError(f"unknown measure {measure!r}")


def bootstrap_measures(
    input_affinity: np.ndarray,
    responses,
    plan: BootstrapPlan,
    measures: Sequence[str] = MEASURE_NAMES,
    scorer: Callable = cosine_affinity,
) -> dict[str, MeasureResult]:
    """Average the selected measures over bootstrap draws of the outputs.

    Each replicate b draws, in state order 0..n, one response embedding per
    state (with replacement from that state's replicates), scores the drawn
    set into an output affinity matrix, normalises it into P_y and evaluates
    every selected measure on the same draw, so measure comparisons stay
    paired.  Identical (inputs, plan) give bit-identical results.
    """
    a_x = np.asarray(input_affinity, dtype=float)
    p_x = row_normalize(a_x)
    reps = _replicate_array(responses)
    n_states, r, _ = reps.shape
    if n_states != a_x.shape[0]:
        raise InvalidInputError("response states do not match the input affinity")
    for name in measures:
        if name not in MEASURE_NAMES and name != "nr_inv_entropy":
            raise InvalidInputError(f"unknown measure {name!r}")

    traces: dict[str, list[float]] = {name: [] for name in measures}
    for b in range(plan.count):
        rng = _bootstrap_rng(plan.seed, b)
        picks = np.array([rng.integers(0, r) for _ in range(n_states)])
        drawn = reps[np.arange(n_states), picks]
        try:
            a_y = build_affinity_matrix(drawn, scorer)
        except InventropyError as exc:
            raise InventropyError(f"bootstrap replicate {b} failed: {exc}") from exc
        p_y = row_normalize(a_y)
        for name in measures:
            if name == "nr_inv_entropy":
                continue
            traces[name].append(_evaluate(name, a_x, p_x, a_y, p_y))

    results: dict[str, MeasureResult] = {}
    for name in measures:
        if name == "nr_inv_entropy":
            # Replication-free variant: first response per state, no resampling.
            first = reps[:, 0, :]
            a_y = build_affinity_matrix(first, scorer)
            p_y = row_normalize(a_y)
            values = [inv_entropy(p_y, p_x)]
        else:
            values = traces[name]
        results[name] = MeasureResult(
            name=name, value=float(np.mean(values)), per_bootstrap=values
        )
    return results


def bootstrap_measure(
    measure: str,
    input_affinity: np.ndarray,
    responses,
    plan: BootstrapPlan,
    scorer: Callable = cosine_affinity,
) -> MeasureResult:
    """Single-measure convenience wrapper over ``bootstrap_measures``."""
    return bootstrap_measures(input_affinity, responses, plan, [measure], scorer)[measure]
