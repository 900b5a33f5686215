"""Model-selection criteria (AIC, BIC) and Category Utility."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import attribute_entropies, weighted_average_density
from .model import ClusterAssignment, Dataset, MixtureModel, Schema


def degrees_of_freedom(schema: Schema, k: int) -> int:
    """Free parameters: k-1 mixing weights plus k multinomials per attribute."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (k - 1) + k * int(np.sum(schema.cardinalities - 1))


def aic(log_likelihood: float, dof: int) -> float:
    return 2.0 * dof - 2.0 * log_likelihood


def bic(log_likelihood: float, dof: int, n: float) -> float:
    if n < 1:
        raise ValueError("BIC needs at least one record")
    return math.log(n) * dof - 2.0 * log_likelihood


def category_utility(assignment: ClusterAssignment, dataset: Dataset) -> float:
    """Category Utility of a hard clustering, normalized by the number of clusters.

    ``CU = 1/k * sum_i P(C_i) * sum_m sum_v [P(v|C_i)^2 - P(v)^2]``, weighted by
    record multiplicities.  Empty clusters contribute nothing.
    """
    labels = np.asarray(assignment.labels)
    if labels.shape != (dataset.n_records,):
        raise ValueError("assignment must cover every record")
    k = assignment.k
    w = dataset.weights
    total = w.sum()
    width = dataset.schema.width
    flat = dataset.flat_codes
    m = dataset.schema.n_attributes
    # joint (cluster, column) weights in one bincount
    idx = (labels[:, None] * width + flat).ravel()
    joint = np.bincount(idx, weights=np.repeat(w, m), minlength=k * width).reshape(k, width)
    sizes = np.bincount(labels, weights=w, minlength=k)
    p_global = joint.sum(axis=0) / total
    base = float(np.sum(p_global ** 2))
    cu = 0.0
    for i in range(k):
        if sizes[i] <= 0:
            continue
        p_cond = joint[i] / sizes[i]
        cu += sizes[i] / total * (float(np.sum(p_cond ** 2)) - base)
    return cu / k


def mean_entropy(model: MixtureModel) -> float:
    """Prior-weighted per-attribute entropy of the components (experimental)."""
    ent = attribute_entropies(model)
    ok = ~np.isnan(ent[:, 0])
    return float(np.dot(model.priors[ok], ent[ok].mean(axis=1)))


@dataclass(frozen=True)
class CriteriaReport:
    aic: float
    bic: float
    dof: int
    mean_density: float
    category_utility: Optional[float] = None
    mean_entropy: Optional[float] = None


def criteria(model: MixtureModel, dataset: Dataset,
             assignment: Optional[ClusterAssignment] = None) -> CriteriaReport:
    dof = degrees_of_freedom(model.schema, model.k)
    ll = model.log_likelihood
    starved_below = 1e-12 * dataset.total_weight
    return CriteriaReport(
        aic=aic(ll, dof),
        bic=bic(ll, dof, dataset.total_weight),
        dof=dof,
        mean_density=weighted_average_density(model, starved_below),
        category_utility=None if assignment is None else category_utility(assignment, dataset),
        mean_entropy=mean_entropy(model),
    )
