"""Pairwise similarity scores and affinity-matrix construction.

An affinity matrix holds the non-negative similarities a(z_i, z_j) between
the n+1 items of one analysis (the original plus n perturbations).  Entries
are symmetrised, clamped at zero and later row-normalised into transition
matrices, so every cell must be finite and the diagonal strictly positive.
"""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSimilarityError, InvalidInputError, ScorerError

logger = logging.getLogger(__name__)

# Providers may emit tiny negative scores from floating-point noise; anything
# more negative than this is treated as a real contract violation.
NEGATIVE_SCORE_TOLERANCE = 1e-9


def cosine_affinity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity mapped onto [0, 1]: (1 + cos(u, v)) / 2."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InvalidInputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise InvalidInputError("cosine similarity is undefined for a zero vector")
    cos = float(np.dot(u, v) / (nu * nv))
    cos = min(1.0, max(-1.0, cos))
    return 0.5 * (1.0 + cos)


def symmetrize_score(a_ij: float, a_ji: float) -> float:
    """Average the two directed scores of an asymmetric scorer."""
    if not (np.isfinite(a_ij) and np.isfinite(a_ji)):
        raise InvalidInputError("similarity scores must be finite")
    return 0.5 * (a_ij + a_ji)


def validate_embedding_matrix(vectors) -> np.ndarray:
    """Stack embeddings into an (m, d) float array, rejecting degenerate rows.

    All vectors must share one dimension, contain only finite entries and
    have a positive norm (an all-zero embedding would silently make every
    affinity uniform, so it is rejected at ingestion).
    """
    matrix = np.asarray(vectors, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] < 1:
        raise InvalidInputError("embeddings must form an (m, d) matrix with d >= 1")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("embeddings contain non-finite entries")
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.nonzero(norms == 0.0)[0][0])
        raise InvalidInputError(f"embedding {bad} is the zero vector")
    return matrix


def build_affinity_matrix(
    items: Sequence,
    scorer: Callable[[object, object], float] = cosine_affinity,
) -> np.ndarray:
    """Score every ordered pair and symmetrise into an affinity matrix.

    ``items`` can be embedding vectors (rows of an array) or any objects the
    scorer understands, e.g. raw texts for an entailment scorer.  The scorer
    may be asymmetric; each cell becomes the mean of the two directions.  The
    diagonal is scored like any other pair rather than pinned to 1, because a
    provider-based scorer may legitimately return self-similarity below 1.
    """
    if isinstance(items, np.ndarray):
        items = validate_embedding_matrix(items)
    m = len(items)
    if m < 2:
        raise InvalidInputError("need at least two items to build an affinity matrix")

    affinity = np.zeros((m, m), dtype=float)
    for i in range(m):
        for j in range(i, m):
            try:
                s_ij = float(scorer(items[i], items[j]))
                s_ji = s_ij if i == j else float(scorer(items[j], items[i]))
            except Exception as exc:  # propagate with pair indices
                raise ScorerError(i, j, exc) from exc
            value = symmetrize_score(s_ij, s_ji)
            if value < 0.0:
                if value < -NEGATIVE_SCORE_TOLERANCE:
                    raise InvalidInputError(
                        f"scorer returned negative similarity {value} for pair ({i}, {j})"
                    )
                logger.warning(
                    "clamping tiny negative similarity %.3e for pair (%d, %d)",
                    value,
                    i,
                    j,
                )
                value = 0.0
            affinity[i, j] = value
            affinity[j, i] = value

    diag = np.diag(affinity)
    if np.any(diag <= 0.0):
        bad = int(np.nonzero(diag <= 0.0)[0][0])
        raise DegenerateSimilarityError(
            f"item {bad} has non-positive self-similarity {diag[bad]}"
        )
    return affinity
