"""Perturbation-based uncertainty quantification for black-box text generators.

Perturb a question, query the model a few times per variant, embed inputs
and outputs, and read uncertainty off the alignment of two random walks:
one over input similarities, one over output similarities.  The package
bundles the perturbation engine, the measures, provider clients with
caching, the evaluation harness and both a CLI and an HTTP service.
"""

from .measures import (
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
from .metrics import (
    EvalRecord,
    IsotonicModel,
    TemperatureSeries,
    auroc,
    bootstrap_statistic,
    brier,
    isotonic_apply,
    isotonic_fit,
    prr,
    tsu,
    tsu_table,
)
from .similarity import build_affinity_matrix, cosine_affinity, symmetrize_score
from .walks import (
    closed_form_diagonal,
    conditional_x_given_y,
    conditional_y_given_x,
    epsilon_affinity,
    marginal_x,
    marginal_y,
    row_normalize,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapPlan",
    "EvalRecord",
    "IsotonicModel",
    "MeasureResult",
    "TemperatureSeries",
    "auroc",
    "bootstrap_measure",
    "bootstrap_measures",
    "bootstrap_statistic",
    "brier",
    "build_affinity_matrix",
    "closed_form_diagonal",
    "conditional_x_given_y",
    "conditional_y_given_x",
    "cosine_affinity",
    "default_ground_cost",
    "epsilon_affinity",
    "inv_entropy",
    "isotonic_apply",
    "isotonic_fit",
    "marginal_x",
    "marginal_y",
    "max_py_x",
    "ni_entropy",
    "prr",
    "row_normalize",
    "symmetrize_score",
    "tsu",
    "tsu_table",
    "wasserstein_exact",
    "wd_px_py",
]
