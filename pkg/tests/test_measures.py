import math

import networkx as nx
import numpy as np
import pytest

from inventropy.errors import InvalidInputError
from inventropy.measures import (
    BootstrapPlan,
    MeasureResult,
    bootstrap_measure,
    bootstrap_measures,
    default_ground_cost,
    inv_entropy,
    max_py_x,
    ni_entropy,
    wasserstein_exact,
    wd_px_py,
)
from inventropy.walks import epsilon_affinity, row_normalize


def eps_pair(n, eps_x, eps_y):
    return row_normalize(epsilon_affinity(n, eps_y)), row_normalize(epsilon_affinity(n, eps_x))


# Frozen from the analytic diagonal: p = 0.375, H = 3 * (-p * ln p)
EPS_HALF_ENTROPY = 3 * (-0.375 * math.log(0.375))


# -- entropies ---------------------------------------------------------------


def test_inv_entropy_identity_is_zero():
    assert inv_entropy(np.eye(3), np.eye(3)) == 0.0


def test_inv_entropy_uniform_is_log3():
    u = np.full((3, 3), 1 / 3)
    assert inv_entropy(u, u) == pytest.approx(math.log(3), abs=1e-12)


def test_inv_entropy_epsilon_half():
    p_y, p_x = eps_pair(2, 0.5, 0.5)
    assert inv_entropy(p_y, p_x) == pytest.approx(EPS_HALF_ENTROPY, abs=1e-12)


def test_ni_entropy_matches_in_symmetric_construction():
    assert ni_entropy(np.eye(3), np.eye(3)) == 0.0
    u = np.full((3, 3), 1 / 3)
    assert ni_entropy(u, u) == pytest.approx(math.log(3), abs=1e-12)
    p_y, p_x = eps_pair(2, 0.5, 0.5)
    assert ni_entropy(p_y, p_x) == pytest.approx(EPS_HALF_ENTROPY, abs=1e-12)


def test_max_py_x_examples():
    assert max_py_x(np.eye(3), np.eye(3)) == pytest.approx(1.0)
    u = np.full((3, 3), 1 / 3)
    assert max_py_x(u, u) == pytest.approx(1 / 3)
    p_y, p_x = eps_pair(2, 0.5, 0.5)
    assert max_py_x(p_y, p_x) == pytest.approx(0.375)


def test_measures_invariant_under_relabeling():
    rng = np.random.default_rng(11)
    p_y = row_normalize(rng.uniform(0.05, 1.0, size=(5, 5)))
    p_x = row_normalize(rng.uniform(0.05, 1.0, size=(5, 5)))
    perm = rng.permutation(5)
    p_yp = p_y[np.ix_(perm, perm)]
    p_xp = p_x[np.ix_(perm, perm)]
    assert inv_entropy(p_yp, p_xp) == pytest.approx(inv_entropy(p_y, p_x), abs=1e-12)
    assert ni_entropy(p_yp, p_xp) == pytest.approx(ni_entropy(p_y, p_x), abs=1e-12)
    assert max_py_x(p_yp, p_xp) == pytest.approx(max_py_x(p_y, p_x), abs=1e-12)


def test_inv_entropy_increases_with_output_dispersion_below_1_over_e():
    # dispersion monotonicity, valid while all diagonals stay <= 1/e
    from inventropy.walks import closed_form_diagonal

    for n in (6, 9):
        for eps_x in (0.3, 0.5, 0.8):
            values = []
            for eps_y in np.arange(0.3, 0.91, 0.1):
                if closed_form_diagonal(n, eps_x, eps_y) > 1 / math.e:
                    continue
                if closed_form_diagonal(n, eps_x, eps_y + 0.1) > 1 / math.e:
                    continue
                p_y, p_x = eps_pair(n, eps_x, eps_y)
                values.append(inv_entropy(p_y, p_x))
            assert np.all(np.diff(values) > 0)


# -- optimal transport -------------------------------------------------------


def flow_oracle(weights_p, weights_q, int_cost):
    """Exact transport cost via min-cost flow on integer masses."""
    graph = nx.DiGraph()
    m = len(weights_p)
    for i, w in enumerate(weights_p):
        graph.add_node(("s", i), demand=-int(w))
    for j, w in enumerate(weights_q):
        graph.add_node(("t", j), demand=int(w))
    for i in range(m):
        for j in range(m):
            graph.add_edge(("s", i), ("t", j), weight=int(int_cost[i][j]))
    return nx.min_cost_flow_cost(graph)


def test_wd_identical_distributions_zero():
    cost = default_ground_cost(np.eye(2), np.eye(2))
    assert wasserstein_exact(np.array([0.3, 0.7]), np.array([0.3, 0.7]), cost) == 0.0


def test_wd_two_state_examples():
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert wasserstein_exact(np.array([1.0, 0.0]), np.array([0.0, 1.0]), cost) == pytest.approx(1.0)
    cost2 = np.array([[0.0, 2.0], [2.0, 0.0]])
    # brute force: move 0.3 mass at cost 2
    assert wasserstein_exact(
        np.array([0.7, 0.3]), np.array([0.4, 0.6]), cost2
    ) == pytest.approx(0.6, abs=1e-9)


def test_wd_matches_min_cost_flow_oracle():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m = int(rng.integers(2, 6))
        wp = rng.integers(1, 20, size=m)
        total = int(wp.sum())
        # positive integer masses on the q side with the same total
        wq = rng.multinomial(total - m, np.full(m, 1.0 / m)) + 1
        int_cost = rng.integers(0, 10, size=(m, m))
        int_cost = int_cost + int_cost.T
        np.fill_diagonal(int_cost, 0)
        expected = flow_oracle(wp, wq, int_cost) / total
        got = wasserstein_exact(wp / total, wq / total, int_cost.astype(float))
        assert got == pytest.approx(expected, abs=1e-9)


def test_wd_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(8)
    m = 4
    points = rng.normal(size=(m, 2))
    cost = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    for _ in range(10):
        dists = rng.dirichlet(np.ones(m), size=3)
        d_ab = wasserstein_exact(dists[0], dists[1], cost)
        d_ba = wasserstein_exact(dists[1], dists[0], cost)
        d_bc = wasserstein_exact(dists[1], dists[2], cost)
        d_ac = wasserstein_exact(dists[0], dists[2], cost)
        assert d_ab == pytest.approx(d_ba, abs=1e-8)
        assert d_ac <= d_ab + d_bc + 1e-8


def test_wd_px_py_on_transitions():
    p_y, p_x = eps_pair(2, 0.5, 0.5)
    cost = default_ground_cost(epsilon_affinity(2, 0.5), epsilon_affinity(2, 0.5))
    # symmetric construction: both marginals uniform
    assert wd_px_py(p_y, p_x, cost) == pytest.approx(0.0, abs=1e-9)


def test_default_ground_cost_properties():
    rng = np.random.default_rng(9)
    a_x = rng.uniform(0, 1, size=(4, 4))
    a_x = (a_x + a_x.T) / 2
    a_y = rng.uniform(0, 1, size=(4, 4))
    a_y = (a_y + a_y.T) / 2
    cost = default_ground_cost(a_x, a_y)
    assert np.allclose(cost, cost.T)
    assert np.all(np.diag(cost) == 0.0)
    assert cost.min() >= 0.0 and cost.max() <= 1.0


def test_ground_cost_validation():
    p_y, p_x = eps_pair(2, 0.5, 0.5)
    bad = np.ones((3, 3))  # nonzero diagonal
    with pytest.raises(InvalidInputError):
        wd_px_py(p_y, p_x, bad)


# -- bootstrap ---------------------------------------------------------------


def orthogonal(n, d=None):
    return np.eye(n, d if d else n)


def test_bootstrap_deterministic():
    rng = np.random.default_rng(12)
    responses = rng.normal(size=(4, 5, 8))
    a_x = epsilon_affinity(3, 0.5)
    plan = BootstrapPlan(count=30, seed=99)
    first = bootstrap_measures(a_x, responses, plan)
    second = bootstrap_measures(a_x, responses, plan)
    for name in first:
        assert first[name].per_bootstrap == second[name].per_bootstrap
        assert first[name].value == second[name].value


def test_bootstrap_single_replicate_collapses():
    # r = 1: every bootstrap sees the same outputs (replication-free setup)
    rng = np.random.default_rng(13)
    responses = rng.normal(size=(3, 1, 6))
    a_x = epsilon_affinity(2, 0.5)
    result = bootstrap_measure("inv_entropy", a_x, responses, BootstrapPlan(count=7, seed=1))
    assert len(set(result.per_bootstrap)) == 1
    nr = bootstrap_measure("nr_inv_entropy", a_x, responses, BootstrapPlan(count=1, seed=5))
    assert result.value == pytest.approx(nr.value, abs=1e-12)


def test_bootstrap_identical_responses_hit_log_n_plus_1():
    # all replications of all states identical: P_y uniform every replicate
    n_states = 4
    responses = np.tile(np.array([1.0, 0.0, 0.0, 0.0]), (n_states, 3, 1))
    a_x = epsilon_affinity(n_states - 1, 0.5)
    result = bootstrap_measure(
        "inv_entropy", a_x, responses, BootstrapPlan(count=5, seed=3)
    )
    for value in result.per_bootstrap:
        assert value == pytest.approx(math.log(n_states), abs=1e-12)


def test_bootstrap_dissimilar_inputs_and_outputs_zero_entropy():
    # maximally dissimilar everywhere: both affinities collapse to identity
    n_states = 3
    responses = np.eye(n_states).reshape(n_states, 1, n_states)

    def all_or_nothing(u, v):
        return 1.0 if np.array_equal(u, v) else 0.0

    a_x = epsilon_affinity(n_states - 1, 1.0)
    result = bootstrap_measure(
        "inv_entropy",
        a_x,
        responses,
        BootstrapPlan(count=3, seed=4),
        scorer=all_or_nothing,
    )
    assert result.value == pytest.approx(0.0, abs=1e-12)


def test_bootstrap_value_is_mean_of_traces():
    rng = np.random.default_rng(14)
    responses = rng.normal(size=(3, 4, 5))
    a_x = epsilon_affinity(2, 0.4)
    results = bootstrap_measures(a_x, responses, BootstrapPlan(count=11, seed=2))
    for res in results.values():
        assert res.value == pytest.approx(float(np.mean(res.per_bootstrap)), abs=1e-12)
        assert len(res.per_bootstrap) == (11 if res.name != "nr_inv_entropy" else 1)


def test_bootstrap_rejects_ragged_replicates():
    a_x = epsilon_affinity(1, 0.5)
    ragged = [[[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]]
    with pytest.raises(InvalidInputError):
        bootstrap_measure("inv_entropy", a_x, ragged, BootstrapPlan(count=2, seed=0))


def test_measure_result_mean_invariant():
    with pytest.raises(InvalidInputError):
        MeasureResult(name="x", value=1.0, per_bootstrap=[0.0, 0.0])


def test_unknown_measure_rejected():
    with pytest.raises(InvalidInputError):
        bootstrap_measure(
            "nope", epsilon_affinity(2, 0.5), np.ones((3, 1, 2)), BootstrapPlan(count=1, seed=0)
        )
