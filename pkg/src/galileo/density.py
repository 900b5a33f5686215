"""Entropy-based effective length, volume and density of categorical components.

The effective length of a one-dimensional distribution is ``exp(S)`` with
``S`` its Shannon entropy in nats; a component's effective volume is the
product over attributes and its density is effective size over volume.  For
duplicate-free data the density never exceeds one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyComponentError, NormalizationError
from .model import Component, MixtureModel

#: counts at or below this fraction of the effective size are outside the support
SUPPORT_THRESHOLD = 1e-12

ENTROPY = "entropy"
CARTESIAN = "cartesian"


def entropy(dist) -> float:
    """Shannon entropy in nats, with 0 log 0 taken as 0."""
    p = np.asarray(dist, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise NormalizationError("expected a non-empty probability vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-6:
        raise NormalizationError(f"not a probability vector (sum={p.sum()!r})")
    nz = p[p > 0]
    return float(max(0.0, -np.sum(nz * np.log(nz))))


def effective_length(dist) -> float:
    return math.exp(entropy(dist))


@dataclass(frozen=True)
class DensityReport:
    per_attribute_entropy: np.ndarray
    effective_volume: float
    density: float
    cartesian_density: float


def component_density(c: Component) -> DensityReport:
    """Entropy and Cartesian densities of one component (unsmoothed)."""
    n = c.effective_size
    if not n > 0:
        raise EmptyComponentError("component has zero effective size")
    ent = np.array([entropy(cnt / n) for cnt in c.counts])
    support = [int(np.count_nonzero(cnt > SUPPORT_THRESHOLD * n)) for cnt in c.counts]
    total = float(ent.sum())
    return DensityReport(
        per_attribute_entropy=ent,
        effective_volume=math.exp(total),
        density=n * math.exp(-total),
        cartesian_density=n / math.prod(support),
    )


def attribute_entropies(model: MixtureModel) -> np.ndarray:
    """(k, M) per-attribute entropies of every component; NaN rows for empty ones."""
    sizes = model.sizes[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = model.counts / sizes
        plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    ent = -np.add.reduceat(plogp, model.schema.offsets[:-1], axis=1)
    ent = np.maximum(ent, 0.0)
    ent[model.sizes <= 0] = np.nan
    return ent


def densities(model: MixtureModel, metric: str = ENTROPY,
              starved_below: Optional[float] = None) -> np.ndarray:
    """Density of every component of ``model``.

    Components whose effective size is at most ``starved_below`` get density 0
    so that they rank last.  With ``starved_below=None`` an empty component
    raises :class:`EmptyComponentError`.
    """
    sizes = model.sizes
    starved = sizes <= (0.0 if starved_below is None else starved_below)
    if starved_below is None and np.any(starved):
        raise EmptyComponentError("model contains a component with zero effective size")
    out = np.zeros(model.k)
    live = ~starved
    if not np.any(live):
        return out
    if metric == ENTROPY:
        ent = attribute_entropies(model)[live]
        out[live] = sizes[live] * np.exp(-ent.sum(axis=1))
    elif metric == CARTESIAN:
        inside = model.counts[live] > SUPPORT_THRESHOLD * sizes[live, None]
        support = np.add.reduceat(inside.astype(np.float64), model.schema.offsets[:-1], axis=1)
        out[live] = sizes[live] / np.prod(support, axis=1)
    else:
        raise ValueError(f"unknown density metric {metric!r}")
    return out


def weighted_average_density(model: MixtureModel, starved_below: Optional[float] = None) -> float:
    """Prior-weighted mean of the entropy-based component densities."""
    return float(np.dot(model.priors, densities(model, ENTROPY, starved_below)))
