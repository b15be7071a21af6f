"""Monte Carlo check that tangent-set variance measures gradient misalignment.

If a reference function f* is locally constant on the hyperplane orthogonal
to its gradient, then for a model f around the same point x0

    Var[f(x0 + P z)] / sigma^2  ->  ||grad f(x0)||^2 sin^2(angle)  + O(sigma)

where P projects onto that hyperplane and z is isotropic normal with scale
sigma.  ``variance_ratio`` estimates the left side by sampling and computes
the right side analytically; the gap should shrink as sigma does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class ScalarField:
    """A scalar function with its analytic gradient.

    ``fn`` must accept an (m, d) batch of points and return m values;
    ``grad`` takes a single point and returns its gradient.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TangentProbe:
    x0: np.ndarray
    sigma: float
    samples: int
    seed: int = 0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise InvalidInputError("sigma must be positive")
        if self.samples < 2:
            raise InvalidInputError("variance needs at least two samples")


def tangent_projector(grad: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the hyperplane annihilating ``grad``."""
    g = np.asarray(grad, dtype=float)
    norm2 = float(g @ g)
    if norm2 == 0.0:
        raise InvalidInputError("gradient is zero; the tangent set is undefined")
    return np.eye(g.size) - np.outer(g, g) / norm2


def _sin2_angle(g1: np.ndarray, g2: np.ndarray) -> float:
    n1 = np.linalg.norm(g1)
    n2 = np.linalg.norm(g2)
    if n1 == 0.0 or n2 == 0.0:
        raise InvalidInputError("gradients must be nonzero")
    cos = float(g1 @ g2 / (n1 * n2))
    cos = min(1.0, max(-1.0, cos))
    return 1.0 - cos * cos


def variance_ratio(
    f_star: ScalarField, f_hat: ScalarField, probe: TangentProbe
) -> tuple[float, float]:
    """(empirical, predicted) scaled variance of f_hat on the tangent set.

    empirical: unbiased sample variance of f_hat over ``samples`` perturbed
    points x0 + P z, divided by sigma^2.  predicted: the analytic limit
    ||grad f_hat||^2 sin^2(angle between the two gradients).
    """
    x0 = np.asarray(probe.x0, dtype=float)
    g_star = np.asarray(f_star.grad(x0), dtype=float)
    g_hat = np.asarray(f_hat.grad(x0), dtype=float)
    projector = tangent_projector(g_star)

    rng = np.random.default_rng(probe.seed)
    z = rng.standard_normal((probe.samples, x0.size)) * probe.sigma
    points = x0[None, :] + z @ projector  # projector is symmetric
    values = np.asarray(f_hat.fn(points), dtype=float)
    empirical = float(np.var(values, ddof=1) / probe.sigma**2)
    predicted = float(g_hat @ g_hat) * _sin2_angle(g_hat, g_star)
    return empirical, predicted


def sigma_sweep(
    f_star: ScalarField,
    f_hat: ScalarField,
    x0: np.ndarray,
    sigmas: Sequence[float],
    samples: int,
    seed: int = 0,
) -> list[dict]:
    """Rows of (sigma, empirical, predicted, gap) for a shrinking-sigma scan."""
    rows = []
    for i, sigma in enumerate(sigmas):
        probe = TangentProbe(x0=np.asarray(x0, float), sigma=sigma, samples=samples, seed=seed + i)
        empirical, predicted = variance_ratio(f_star, f_hat, probe)
        rows.append(
            {
                "sigma": float(sigma),
                "empirical": empirical,
                "predicted": predicted,
                "gap": abs(empirical - predicted),
            }
        )
    return rows


def check_gradient(field: ScalarField, x: np.ndarray, rel_tol: float = 1e-5) -> None:
    """Central-difference check of the analytic gradient at a probe point."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(field.grad(x), dtype=float)
    h = 1e-6
    fd = np.empty_like(g)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        hi = float(field.fn((x + step)[None, :])[0])
        lo = float(field.fn((x - step)[None, :])[0])
        fd[k] = (hi - lo) / (2 * h)
    scale = max(1.0, float(np.linalg.norm(g)))
    if np.linalg.norm(fd - g) > rel_tol * scale:
        raise InvalidInputError(
            f"analytic gradient disagrees with finite differences: {g} vs {fd}"
        )


# ---------------------------------------------------------------------------
# Bundled test fields
# ---------------------------------------------------------------------------


def linear_field(direction: Sequence[float]) -> ScalarField:
    d = np.asarray(direction, dtype=float)
    return ScalarField(fn=lambda pts: pts @ d, grad=lambda x: d.copy())


def linear_pair(angle_deg: float, dim: int = 2) -> tuple[ScalarField, ScalarField]:
    """Reference along e1 and a model gradient rotated by ``angle_deg``."""
    if dim < 2:
        raise InvalidInputError("need dim >= 2 to rotate a gradient")
    theta = np.deg2rad(angle_deg)
    ref = np.zeros(dim)
    ref[0] = 1.0
    model = np.zeros(dim)
    model[0] = np.cos(theta)
    model[1] = np.sin(theta)
    return linear_field(ref), linear_field(model)


def quadratic_bowl(curvature: float = 2.0, dim: int = 3) -> tuple[ScalarField, ScalarField]:
    """Reference e1; model e2-linear plus a curvature/2 * ||x||^2 bowl.

    The bowl's second-order term biases the tangent-set variance by an
    amount that vanishes with sigma, which is exactly the remainder the
    sweep is meant to expose.
    """
    ref = np.zeros(dim)
    ref[0] = 1.0

    def fn(pts: np.ndarray) -> np.ndarray:
        return pts[:, 1] + 0.5 * curvature * (pts**2).sum(axis=1)

    def grad(x: np.ndarray) -> np.ndarray:
        g = curvature * np.asarray(x, dtype=float)
        g[1] += 1.0
        return g

    return linear_field(ref), ScalarField(fn=fn, grad=grad)


def rippled_linear(
    amplitude: float = 0.05, frequency: float = 3.0, dim: int = 3
) -> tuple[ScalarField, ScalarField]:
    """Reference e1; model e2-linear with a bounded-Hessian sinusoidal ripple."""
    ref = np.zeros(dim)
    ref[0] = 1.0

    def fn(pts: np.ndarray) -> np.ndarray:
        return pts[:, 1] + amplitude * np.sin(frequency * pts[:, 1])

    def grad(x: np.ndarray) -> np.ndarray:
        g = np.zeros(dim)
        g[1] = 1.0 + amplitude * frequency * np.cos(frequency * x[1])
        return g

    return linear_field(ref), ScalarField(fn=fn, grad=grad)
