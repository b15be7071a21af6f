import numpy as np
import pytest
from hypothesis import given, strategies as st

from inventropy.errors import DegenerateSimilarityError, InvalidInputError, ScorerError
from inventropy.similarity import (
    build_affinity_matrix,
    cosine_affinity,
    symmetrize_score,
    validate_embedding_matrix,
)


def test_cosine_identical_vectors():
    assert cosine_affinity(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 1.0


def test_cosine_antipodal():
    assert cosine_affinity(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 0.0


def test_cosine_orthogonal():
    assert cosine_affinity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.5


def test_cosine_zero_vector_rejected():
    with pytest.raises(InvalidInputError):
        cosine_affinity(np.zeros(3), np.ones(3))


def test_cosine_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        cosine_affinity(np.ones(2), np.ones(3))


def test_cosine_scale_invariance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = rng.normal(size=4)
        v = rng.normal(size=4)
        a, b = rng.uniform(0.1, 10.0, size=2)
        assert cosine_affinity(a * u, b * v) == pytest.approx(
            cosine_affinity(u, v), abs=1e-12
        )


@given(st.floats(0, 1), st.floats(0, 1))
def test_symmetrize_is_symmetric(a, b):
    assert symmetrize_score(a, b) == symmetrize_score(b, a)


@pytest.mark.parametrize(
    "a,b,expected", [(0.8, 0.8, 0.8), (1.0, 0.0, 0.5), (0.6, 0.2, 0.4)]
)
def test_symmetrize_examples(a, b, expected):
    assert symmetrize_score(a, b) == pytest.approx(expected, abs=1e-15)


def test_affinity_identical_vectors_all_ones():
    vectors = np.array([[1.0, 2.0]] * 3)
    assert np.allclose(build_affinity_matrix(vectors), np.ones((3, 3)))


def test_affinity_cosine_example():
    # direct evaluation of (1 + cos)/2 per pair
    vectors = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    expected = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.5], [0.0, 0.5, 1.0]])
    assert np.allclose(build_affinity_matrix(vectors), expected, atol=1e-15)


def test_affinity_symmetrizes_asymmetric_scorer():
    def scorer(a, b):
        if a == "x" and b == "y":
            return 0.9
        if a == "y" and b == "x":
            return 0.3
        return 1.0

    affinity = build_affinity_matrix(["x", "y"], scorer)
    assert affinity[0, 1] == affinity[1, 0] == pytest.approx(0.6)


def test_affinity_provider_diagonal_below_one_accepted():
    scores = {("a", "a"): 0.9, ("b", "b"): 0.8, ("a", "b"): 0.4, ("b", "a"): 0.4}
    affinity = build_affinity_matrix(["a", "b"], lambda u, v: scores[(u, v)])
    assert affinity[0, 0] == pytest.approx(0.9)
    assert affinity[1, 1] == pytest.approx(0.8)


def test_affinity_random_sets_symmetric_in_range():
    rng = np.random.default_rng(1)
    for _ in range(20):
        vectors = rng.normal(size=(5, 3))
        affinity = build_affinity_matrix(vectors)
        assert np.allclose(affinity, affinity.T)
        assert affinity.min() >= 0.0 and affinity.max() <= 1.0 + 1e-12


def test_affinity_clamps_tiny_negative_scores():
    affinity = build_affinity_matrix(["a", "b"], lambda u, v: 1.0 if u == v else -5e-10)
    assert affinity[0, 1] == 0.0


def test_affinity_rejects_large_negative_scores():
    with pytest.raises(InvalidInputError):
        build_affinity_matrix(["a", "b"], lambda u, v: 1.0 if u == v else -0.01)


def test_affinity_scorer_failure_carries_pair():
    def scorer(u, v):
        if u == "b" and v == "c":
            raise RuntimeError("boom")
        return 1.0

    with pytest.raises(ScorerError) as err:
        build_affinity_matrix(["a", "b", "c"], scorer)
    assert err.value.pair == (1, 2)


def test_affinity_rejects_zero_self_similarity():
    with pytest.raises(DegenerateSimilarityError):
        build_affinity_matrix(["a", "b"], lambda u, v: 0.0)


def test_affinity_needs_two_items():
    with pytest.raises(InvalidInputError):
        build_affinity_matrix(np.array([[1.0, 0.0]]))


def test_validate_embeddings_rejects_zero_rows():
    with pytest.raises(InvalidInputError):
        validate_embedding_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_validate_embeddings_rejects_nan():
    with pytest.raises(InvalidInputError):
        validate_embedding_matrix(np.array([[1.0, np.nan]]))
