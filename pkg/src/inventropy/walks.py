"""Transition matrices and distributions of the dual-random-walk model.

Two row-stochastic matrices P_x and P_y over the shared state set
{0, ..., n} (one state per perturbed input) drive everything here:

    P_z[i, j] = a(z_i, z_j) / sum_k a(z_i, z_k)          (row normalisation)
    P(Y = y_j)            = (uniform @ P_y)[j]
    P(X = x_i | Y = y_j)  = (P_y @ P_x)[j, i]
    P(X = x_i)            = (uniform @ P_y @ P_x)[i]
    P(Y = y_j | X = x_i)  = P(X=x_i|Y=y_j) P(Y=y_j) / P(X=x_i)   (Bayes)

Convention: in a conditional matrix, the ROW index is the conditioning
state.  ``conditional_x_given_y(P_y, P_x)[j]`` is the distribution of X
given Y = y_j.  One documented convention prevents transpose bugs.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateSimilarityError,
    InvalidInputError,
    UndefinedConditionalError,
)

# Row sums within this of 1 are accepted as-is.
ROW_SUM_ATOL = 1e-9
# Row sums off by more than this cannot be silently repaired.
ROW_SUM_REPAIR_LIMIT = 1e-6


def row_normalize(affinity: np.ndarray) -> np.ndarray:
    """Normalise each affinity row into a transition distribution."""
    a = np.asarray(affinity, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError("affinity matrix must be square")
    if not np.all(np.isfinite(a)) or np.any(a < 0.0):
        raise InvalidInputError("affinity entries must be finite and non-negative")
    sums = a.sum(axis=1)
    if np.any(sums <= 0.0):
        bad = int(np.nonzero(sums <= 0.0)[0][0])
        raise DegenerateSimilarityError(
            f"affinity row {bad} sums to {sums[bad]}; item is dissimilar to "
            "everything including itself"
        )
    return a / sums[:, None]


def check_transition_matrix(p: np.ndarray) -> np.ndarray:
    """Validate a transition matrix, renormalising rows within tolerance.

    Row sums within ROW_SUM_REPAIR_LIMIT of 1 are renormalised; anything
    worse is an error rather than a repair.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidInputError("transition matrix must be square")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise InvalidInputError("transition entries must be finite and non-negative")
    sums = p.sum(axis=1)
    err = np.abs(sums - 1.0)
    if np.any(err > ROW_SUM_REPAIR_LIMIT):
        bad = int(np.argmax(err))
        raise InvalidInputError(
            f"row {bad} sums to {sums[bad]:.9f}; beyond repair tolerance "
            f"{ROW_SUM_REPAIR_LIMIT}"
        )
    if np.any(err > ROW_SUM_ATOL):
        p = p / sums[:, None]
    return p


def uniform_distribution(n_states: int) -> np.ndarray:
    if n_states < 1:
        raise InvalidInputError("need at least one state")
    return np.full(n_states, 1.0 / n_states)


def marginal_y(p_y: np.ndarray) -> np.ndarray:
    """Marginal of Y: one uniform start, one step under P_y."""
    p_y = check_transition_matrix(p_y)
    return uniform_distribution(p_y.shape[0]) @ p_y


def conditional_x_given_y(p_y: np.ndarray, p_x: np.ndarray) -> np.ndarray:
    """Composite walk P_y @ P_x; row j is the distribution of X given Y=y_j."""
    p_y = check_transition_matrix(p_y)
    p_x = check_transition_matrix(p_x)
    if p_y.shape != p_x.shape:
        raise InvalidInputError("transition matrices must share one state set")
    return p_y @ p_x


def marginal_x(p_y: np.ndarray, p_x: np.ndarray) -> np.ndarray:
    """Marginal of X: uniform start, one step under P_y, one under P_x."""
    return uniform_distribution(p_y.shape[0]) @ conditional_x_given_y(p_y, p_x)


def conditional_y_given_x(p_y: np.ndarray, p_x: np.ndarray) -> np.ndarray:
    """Bayes inversion of the composite walk; row i conditions on X=x_i.

    The joint behind the inversion is the one the composite walk defines:
    Y drawn from the uniform start, then X via one P_y step and one P_x
    step.  Its X-marginal is exactly P(X) = uniform @ P_y @ P_x, so

        P(Y=y_j | X=x_i) = P(X=x_i | Y=y_j) * (1/(n+1)) / P(X=x_i)

    and every row sums to 1.  (Weighting by the one-step output marginal
    instead would break row-stochasticity, because that marginal is not
    the walk's start distribution.)
    """
    cond_xy = conditional_x_given_y(p_y, p_x)
    n_states = p_y.shape[0]
    px = uniform_distribution(n_states) @ cond_xy
    if np.any(px <= 0.0):
        bad = int(np.nonzero(px <= 0.0)[0][0])
        raise UndefinedConditionalError(
            f"state {bad} has zero marginal mass; P(Y|X={bad}) is undefined"
        )
    return (cond_xy.T / n_states) / px[:, None]


def closed_form_diagonal(n: int, eps_x: float, eps_y: float) -> float:
    """Analytic diagonal of the composite walk for equi-similarity affinities.

    With a(z_i, z_j) = 1 on the diagonal and 1 - eps_z off it, every diagonal
    entry of P_y @ P_x equals

        (1 + n - n*eps_x - n*eps_y + n*eps_x*eps_y)
        / ((n + 1 - n*eps_x) * (n + 1 - n*eps_y)).

    Exported as the test oracle for the matrix pipeline.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    num = 1.0 + n - n * eps_x - n * eps_y + n * eps_x * eps_y
    den = (n + 1.0 - n * eps_x) * (n + 1.0 - n * eps_y)
    return num / den


def epsilon_affinity(n: int, eps: float) -> np.ndarray:
    """Equi-similarity affinity: 1 on the diagonal, 1 - eps elsewhere."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not 0.0 <= eps <= 1.0:
        raise InvalidInputError("eps must lie in [0, 1]")
    a = np.full((n + 1, n + 1), 1.0 - eps)
    np.fill_diagonal(a, 1.0)
    return a
