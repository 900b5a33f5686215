"""Expectation-maximization for a categorical mixture at fixed k."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateEvidenceWarning
from .model import Dataset, MixtureModel

log = logging.getLogger(__name__)

#: components below this fraction of the total weight are reported as starved
STARVED_FRACTION = 1e-12


@dataclass(frozen=True)
class EmConfig:
    max_iterations: int = 100
    rel_tolerance: float = 1e-6
    smoothing: Optional[float] = None  # None: 1e-9 x effective size per component
    threads: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be positive")
        if self.smoothing is not None and self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def _log_priors(model: MixtureModel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(model.priors)


def _warn_degenerate(n: int) -> None:
    if n:
        warnings.warn(f"{n} record(s) have zero probability under every component",
                      DegenerateEvidenceWarning, stacklevel=3)


def e_step(model: MixtureModel, dataset: Dataset, smoothing: Optional[float] = None,
           threads: int = 1) -> tuple[np.ndarray, float]:
    """Posterior matrix (N, k) and weighted log-likelihood of ``dataset``."""
    post, rec_ll, ndeg = kernels.posterior_pass(
        dataset.flat_codes, model.log_tables(smoothing), _log_priors(model), threads)
    _warn_degenerate(ndeg)
    return post, float(np.dot(dataset.weights, rec_ll))


def m_step(posteriors: np.ndarray, dataset: Dataset) -> MixtureModel:
    """Re-estimate counts, effective sizes and priors from soft assignments."""
    post = np.asarray(posteriors, dtype=np.float64)
    if post.ndim != 2 or post.shape[0] != dataset.n_records:
        raise ValueError("posterior matrix must have one row per record")
    wp = post * dataset.weights[:, None]
    flat = dataset.flat_codes.ravel()
    m = dataset.schema.n_attributes
    counts = np.stack([
        np.bincount(flat, weights=np.repeat(wp[:, i], m), minlength=dataset.schema.width)
        for i in range(post.shape[1])])
    sizes = wp.sum(axis=0)
    model = MixtureModel(dataset.schema, counts, sizes, sizes / sizes.sum())
    _log_starved(model, dataset.total_weight)
    return model


def starved(model: MixtureModel, total_weight: float) -> np.ndarray:
    """Indices of components whose effective size has collapsed."""
    return np.flatnonzero(model.sizes < STARVED_FRACTION * total_weight)


def _log_starved(model, total_weight):
    idx = starved(model, total_weight)
    if idx.size:
        log.debug("starved components: %s", idx.tolist())


def fit(model: MixtureModel, dataset: Dataset, config: EmConfig = EmConfig()) -> MixtureModel:
    """Run EM from ``model`` until the relative log-likelihood change is below tolerance.

    The returned model carries the exact log-likelihood of its own parameters,
    the number of M-steps applied, and the per-iteration log-likelihood history.
    """
    codes, weights = dataset.flat_codes, dataset.weights
    total = dataset.total_weight
    current = model
    history = []
    prev = None
    iterations = 0
    converged = False
    while True:
        counts, sizes, ll, ndeg = kernels.em_pass(
            codes, weights, current.log_tables(config.smoothing), _log_priors(current),
            config.threads)
        _warn_degenerate(ndeg)
        history.append(ll)
        if prev is not None and abs(ll - prev) / (abs(ll) + 1.0) < config.rel_tolerance:
            converged = True
            break
        if iterations == config.max_iterations:
            break
        prev = ll
        current = MixtureModel(dataset.schema, counts, sizes, sizes / total)
        iterations += 1
    if iterations:
        _log_starved(current, total)
    if not converged:
        log.info("EM stopped at k=%d after %d iterations without converging", current.k, iterations)
    return replace(current, log_likelihood=ll, converged=converged, em_iterations=iterations,
                   history=tuple(history))


def log_likelihood(model: MixtureModel, dataset: Dataset, smoothing: Optional[float] = None,
                   threads: int = 1) -> float:
    return e_step(model, dataset, smoothing, threads)[1]


def is_monotone(history, slack: float = 1e-9) -> bool:
    """True when no step decreases the log-likelihood by more than ``slack * |logL|``."""
    h = [x for x in history if math.isfinite(x)]
    return all(b >= a - slack * max(abs(a), 1.0) for a, b in zip(h, h[1:]))
