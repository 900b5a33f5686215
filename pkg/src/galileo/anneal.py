"""Density-based annealing from k_max components down to one.

At every level of the schedule the mixture is fitted by EM, scored (log
likelihood, AIC, BIC, mean density), and then the lowest-density components
are dropped so that exactly the next scheduled number remain.  The best level
according to the configured criterion is returned as stored; nothing is
refitted after selection.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .density import CARTESIAN, ENTROPY, densities, weighted_average_density
from .em import STARVED_FRACTION, EmConfig, fit
from .model import ClusterAssignment, Dataset, MixtureModel
from .selection import aic, bic, degrees_of_freedom

log = logging.getLogger(__name__)

CRITERIA = ("aic", "bic", "density")
PRUNE_METRICS = (ENTROPY, CARTESIAN)
INIT_MODES = ("marginal", "row")

#: mean densities within this relative distance of the best count as tied
DENSITY_TIE_RTOL = 1e-6


@dataclass(frozen=True)
class AnnealConfig:
    kmax: int
    beta: float = 1.0
    prune_metric: str = ENTROPY
    criterion: str = "density"
    seed: int = 0
    em: EmConfig = field(default_factory=EmConfig)
    init_mode: str = "marginal"

    def __post_init__(self):
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if not self.beta >= 1:
            raise ValueError("beta must be >= 1")
        if self.prune_metric not in PRUNE_METRICS:
            raise ValueError(f"prune_metric must be one of {PRUNE_METRICS}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")


@dataclass(frozen=True)
class Level:
    k: int
    log_likelihood: float
    aic: float
    bic: float
    mean_density: float
    em_iterations: int
    converged: bool = True


@dataclass
class AnnealTrace:
    levels: list
    selected_k: int

    def level(self, k: int) -> Level:
        for lv in self.levels:
            if lv.k == k:
                return lv
        raise KeyError(k)

    def best_k(self, criterion: str) -> int:
        return select_k(self.levels, criterion)


@dataclass
class AnnealResult:
    trace: AnnealTrace
    model: MixtureModel
    assignment: ClusterAssignment
    models: dict = field(repr=False, default_factory=dict)

    @property
    def k(self) -> int:
        return self.trace.selected_k


def schedule(kmax: int, beta: float = 1.0) -> list:
    """Visited k values, largest first: k[0]=1, k[i+1] = floor(k[i] + beta**i) <= kmax."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if not beta >= 1:
        raise ValueError("beta must be >= 1")
    ks = [1]
    i = 0
    while True:
        nxt = math.floor(ks[-1] + beta ** i)
        if nxt > kmax:
            break
        if nxt > ks[-1]:
            ks.append(nxt)
        i += 1
    return ks[::-1]


def initialize(dataset: Dataset, kmax: int, seed: int = 0, mode: str = "marginal") -> MixtureModel:
    """kmax components, each the global distribution plus one random center inserted W times."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    rng = np.random.default_rng(seed)
    schema = dataset.schema
    g = dataset.global_counts()
    total = dataset.total_weight
    if mode == "marginal":
        centers = np.empty((kmax, schema.n_attributes), dtype=np.int64)
        for m in range(schema.n_attributes):
            p = g[schema.offsets[m]:schema.offsets[m + 1]] / total
            centers[:, m] = rng.choice(p.size, size=kmax, p=p / p.sum())
    elif mode == "row":
        rows = rng.choice(dataset.n_records, size=kmax, p=dataset.weights / total)
        centers = dataset.codes[rows].astype(np.int64)
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    counts = np.tile(g, (kmax, 1))
    np.add.at(counts, (np.arange(kmax)[:, None], centers + schema.offsets[:-1]), total)
    return MixtureModel(schema, counts, np.full(kmax, 2.0 * total), np.full(kmax, 1.0 / kmax))


def select_k(levels, criterion: str) -> int:
    """k of the best level; ties go to the smaller k."""
    ks = np.array([lv.k for lv in levels])
    if criterion == "aic":
        score = np.array([lv.aic for lv in levels])
        best = ks[score == np.nanmin(score)]
    elif criterion == "bic":
        score = np.array([lv.bic for lv in levels])
        best = ks[score == np.nanmin(score)]
    elif criterion == "density":
        score = np.array([lv.mean_density for lv in levels])
        top = np.nanmax(score)
        best = ks[score >= top - DENSITY_TIE_RTOL * abs(top)]
    else:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    return int(best.min())


def prune(model: MixtureModel, keep: int, metric: str, starved_below: float) -> MixtureModel:
    """Keep the ``keep`` densest components (stable order on ties), priors renormalized."""
    dens = densities(model, metric, starved_below)
    order = np.argsort(-dens, kind="stable")
    return model.select(order[:keep])


def assign(model: MixtureModel, dataset: Dataset, smoothing=None, threads: int = 1) -> ClusterAssignment:
    """Hard assignment of every record to its most probable component."""
    with np.errstate(divide="ignore"):
        log_priors = np.log(model.priors)
    post, _, _ = kernels.posterior_pass(dataset.flat_codes, model.log_tables(smoothing),
                                        log_priors, threads)
    return ClusterAssignment(np.argmax(post, axis=1), model.k, post)


def anneal(dataset: Dataset, config: AnnealConfig) -> AnnealResult:
    ks = schedule(config.kmax, config.beta)
    starved_below = STARVED_FRACTION * dataset.total_weight
    model = initialize(dataset, config.kmax, config.seed, config.init_mode)
    if config.kmax > ks[0]:
        # schedule cannot land on kmax itself: fit once and prune onto the first level
        model = prune(fit(model, dataset, config.em), ks[0], config.prune_metric, starved_below)

    levels = []
    models = {}
    for idx, k in enumerate(ks):
        fitted = fit(model, dataset, config.em)
        dof = degrees_of_freedom(dataset.schema, k)
        ll = fitted.log_likelihood
        level = Level(
            k=k,
            log_likelihood=ll,
            aic=aic(ll, dof),
            bic=bic(ll, dof, dataset.total_weight),
            mean_density=weighted_average_density(fitted, starved_below),
            em_iterations=fitted.em_iterations,
            converged=fitted.converged,
        )
        log.debug("level k=%d logL=%.6g rho=%.6g iters=%d", k, ll, level.mean_density,
                  level.em_iterations)
        levels.append(level)
        models[k] = fitted
        if idx + 1 < len(ks):
            model = prune(fitted, ks[idx + 1], config.prune_metric, starved_below)

    k_star = select_k(levels, config.criterion)
    best = models[k_star]
    trace = AnnealTrace(levels, k_star)
    return AnnealResult(trace, best, assign(best, dataset, config.em.smoothing, config.em.threads),
                        models)
