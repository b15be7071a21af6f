import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from hypothesis import strategies as st

from inventropy.errors import (
    DegenerateSimilarityError,
    InvalidInputError,
    UndefinedConditionalError,
)
from inventropy.walks import (
    check_transition_matrix,
    closed_form_diagonal,
    conditional_x_given_y,
    conditional_y_given_x,
    epsilon_affinity,
    marginal_x,
    marginal_y,
    row_normalize,
)


def random_transition(rng, n):
    return row_normalize(rng.uniform(0.05, 1.0, size=(n, n)))


# -- row_normalize -----------------------------------------------------------


def test_row_normalize_uniform():
    assert np.allclose(row_normalize(np.ones((3, 3))), np.full((3, 3), 1 / 3))


def test_row_normalize_epsilon_half():
    # closed form: diagonal 1/((n+1) - n*eps) with n=2, eps=0.5
    p = row_normalize(epsilon_affinity(2, 0.5))
    assert np.allclose(np.diag(p), 0.5)
    assert p[0, 1] == pytest.approx(0.25)


def test_row_normalize_identity_affinity():
    assert np.allclose(row_normalize(np.eye(3)), np.eye(3))


def test_row_normalize_zero_row_is_degenerate():
    affinity = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegenerateSimilarityError):
        row_normalize(affinity)


def test_check_transition_repairs_small_drift():
    p = np.full((2, 2), 0.5)
    p[0, 0] += 5e-8  # within repair tolerance
    fixed = check_transition_matrix(p)
    assert np.allclose(fixed.sum(axis=1), 1.0, atol=1e-15)


def test_check_transition_rejects_large_drift():
    p = np.full((2, 2), 0.5)
    p[0, 0] += 1e-3
    with pytest.raises(InvalidInputError):
        check_transition_matrix(p)


# -- marginals and conditionals ---------------------------------------------


def test_marginal_y_uniform():
    assert np.allclose(marginal_y(np.full((3, 3), 1 / 3)), [1 / 3] * 3)


def test_marginal_y_identity():
    assert np.allclose(marginal_y(np.eye(3)), [1 / 3] * 3)


def test_marginal_y_column_averages():
    p = np.array([[1.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0]])
    assert np.allclose(marginal_y(p), [2 / 3, 0.0, 1 / 3])


def test_conditional_identity():
    assert np.allclose(conditional_x_given_y(np.eye(3), np.eye(3)), np.eye(3))


def test_conditional_uniform():
    u = np.full((3, 3), 1 / 3)
    assert np.allclose(conditional_x_given_y(u, u), u)


def test_conditional_epsilon_half_diagonal():
    p = row_normalize(epsilon_affinity(2, 0.5))
    cond = conditional_x_given_y(p, p)
    assert np.allclose(np.diag(cond), 0.375)


def test_marginal_x_identities():
    assert np.allclose(marginal_x(np.eye(3), np.eye(3)), [1 / 3] * 3)
    u = np.full((3, 3), 1 / 3)
    assert np.allclose(marginal_x(u, u), [1 / 3] * 3)


def test_marginal_x_reduces_to_marginal_y_of_px():
    p_x = np.array([[1.0, 0, 0], [1.0, 0, 0], [0, 0, 1.0]])
    assert np.allclose(marginal_x(np.eye(3), p_x), [2 / 3, 0.0, 1 / 3])


def test_bayes_identity_and_uniform():
    assert np.allclose(conditional_y_given_x(np.eye(3), np.eye(3)), np.eye(3))
    u = np.full((3, 3), 1 / 3)
    assert np.allclose(conditional_y_given_x(u, u), u)


def test_bayes_epsilon_half_diagonal():
    # symmetric construction: uniform marginals, so Bayes mirrors the forward diagonal
    p = row_normalize(epsilon_affinity(2, 0.5))
    cond = conditional_y_given_x(p, p)
    assert np.allclose(np.diag(cond), 0.375)
    assert np.allclose(cond.sum(axis=1), 1.0)


def test_bayes_zero_marginal_is_error():
    p_x = np.array([[1.0, 0.0], [1.0, 0.0]])  # column 1 has zero mass
    p_y = np.eye(2)
    with pytest.raises(UndefinedConditionalError):
        conditional_y_given_x(p_y, p_x)


def test_bayes_consistency_random():
    # both accumulations recover P(X), and the inverted rows are stochastic
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        p_y = random_transition(rng, n)
        p_x = random_transition(rng, n)
        cond_xy = conditional_x_given_y(p_y, p_x)
        cond_yx = conditional_y_given_x(p_y, p_x)
        px = marginal_x(p_y, p_x)
        assert np.allclose(cond_yx.sum(axis=1), 1.0, atol=1e-12)
        lhs = cond_yx.sum(axis=1) * px
        rhs = cond_xy.T @ np.full(n, 1.0 / n)  # prior of the composite walk
        assert np.allclose(lhs, px, atol=1e-12)
        assert np.allclose(rhs, px, atol=1e-12)


def test_relabeling_equivariance():
    rng = np.random.default_rng(4)
    n = 5
    p_y = random_transition(rng, n)
    p_x = random_transition(rng, n)
    perm = rng.permutation(n)
    p_yp = p_y[np.ix_(perm, perm)]
    p_xp = p_x[np.ix_(perm, perm)]
    assert np.allclose(marginal_y(p_yp), marginal_y(p_y)[perm])
    assert np.allclose(marginal_x(p_yp, p_xp), marginal_x(p_y, p_x)[perm])
    assert np.allclose(
        conditional_x_given_y(p_yp, p_xp),
        conditional_x_given_y(p_y, p_x)[np.ix_(perm, perm)],
    )


@settings(max_examples=30, deadline=None)
@given(
    arrays(np.float64, (4, 4), elements=st.floats(0.05, 1.0)),
    arrays(np.float64, (4, 4), elements=st.floats(0.05, 1.0)),
)
def test_product_rows_stay_stochastic(a_y, a_x):
    cond = conditional_x_given_y(row_normalize(a_y), row_normalize(a_x))
    assert np.allclose(cond.sum(axis=1), 1.0, atol=1e-9)
    assert cond.min() >= 0.0


# -- closed-form oracle ------------------------------------------------------


@pytest.mark.parametrize(
    "n,ex,ey,expected",
    [(2, 1.0, 1.0, 1.0), (2, 0.0, 0.0, 1 / 3), (2, 0.5, 0.5, 0.375)],
)
def test_closed_form_examples(n, ex, ey, expected):
    assert closed_form_diagonal(n, ex, ey) == pytest.approx(expected, abs=1e-15)


def test_closed_form_matches_matrix_pipeline():
    for n in range(1, 9):
        for eps_x in np.arange(0.1, 1.01, 0.1):
            for eps_y in np.arange(0.0, 1.01, 0.1):
                p_y = row_normalize(epsilon_affinity(n, eps_y))
                p_x = row_normalize(epsilon_affinity(n, eps_x))
                diag = np.diag(conditional_x_given_y(p_y, p_x))
                want = closed_form_diagonal(n, eps_x, eps_y)
                assert np.all(np.abs(diag - want) < 1e-12)


def test_closed_form_increasing_in_eps_y():
    for n in (1, 3, 8):
        for eps_x in np.arange(0.1, 1.01, 0.1):
            values = [
                closed_form_diagonal(n, eps_x, eps_y)
                for eps_y in np.arange(0.0, 1.01, 0.1)
            ]
            diffs = np.diff(values)
            assert np.all(diffs > 0.0)
