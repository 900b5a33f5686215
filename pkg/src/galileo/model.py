"""Core data model: schemas, encoded datasets, mixture components and models.

Components keep posterior-weighted *counts* rather than probabilities.  The
EM M-step writes counts, the density metric reads them, and probabilities are
always a derived view, so priors, effective sizes and distributions cannot
drift apart.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import CodeRangeError, DegenerateEvidenceWarning, SchemaError

#: default smoothing pseudo-count, relative to a component's effective size
DEFAULT_RELATIVE_SMOOTHING = 1e-9

_SUM_RTOL = 1e-9


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if len(self.values) < 1:
            raise SchemaError(f"attribute {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise SchemaError(f"attribute {self.name!r} has duplicate value labels")

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def code(self, label: str) -> int:
        try:
            return self.values.index(label)
        except ValueError:
            raise CodeRangeError(f"{label!r} is not a value of {self.name!r}") from None


@dataclass(frozen=True)
class Schema:
    """Ordered categorical attributes and their value dictionaries."""

    attributes: tuple

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")

    @classmethod
    def from_values(cls, spec: Sequence[tuple]) -> "Schema":
        """Build from ``[(name, [labels...]), ...]``."""
        return cls(tuple(AttributeSpec(name, tuple(vals)) for name, vals in spec))

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @cached_property
    def cardinalities(self) -> np.ndarray:
        return np.array([a.cardinality for a in self.attributes], dtype=np.int64)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Start column of each attribute in the flat one-hot layout (length M+1)."""
        return np.concatenate([[0], np.cumsum(self.cardinalities)]).astype(np.int64)

    @property
    def width(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def column_cardinality(self) -> np.ndarray:
        """Cardinality of the owning attribute for every flat column."""
        return np.repeat(self.cardinalities, self.cardinalities).astype(np.float64)

    @cached_property
    def column_attribute(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_attributes), self.cardinalities)

    def split(self, flat: np.ndarray) -> list:
        """Split a flat length-D vector into per-attribute pieces."""
        return [flat[..., self.offsets[m]:self.offsets[m + 1]] for m in range(self.n_attributes)]

    def permuted(self, order: Sequence[int]) -> "Schema":
        return Schema(tuple(self.attributes[i] for i in order))


@dataclass(eq=False)
class Dataset:
    """Encoded categorical records with optional per-record multiplicities."""

    schema: Schema
    codes: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.int32)
        if codes.ndim == 1 and self.schema.n_attributes == 1:
            codes = codes.reshape(-1, 1)
        if codes.ndim != 2 or codes.shape[1] != self.schema.n_attributes:
            raise SchemaError(
                f"codes must have shape (N, {self.schema.n_attributes}), got {codes.shape}")
        if codes.shape[0] < 1:
            raise SchemaError("dataset must contain at least one record")
        if codes.size and (codes.min() < 0 or np.any(codes.max(axis=0) >= self.schema.cardinalities)):
            raise CodeRangeError("category code outside its attribute's value range")
        self.codes = codes
        if self.weights is None:
            self.weights = np.ones(codes.shape[0])
        else:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if w.shape != (codes.shape[0],) or np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise SchemaError("weights must be positive and finite, one per record")
            self.weights = w

    @property
    def n_records(self) -> int:
        return self.codes.shape[0]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def flat_codes(self) -> np.ndarray:
        """Codes shifted into the flat column layout, shape (N, M)."""
        return np.ascontiguousarray(self.codes + self.schema.offsets[:-1].astype(np.int32))

    def global_counts(self) -> np.ndarray:
        """Weighted value counts for all attributes in the flat layout."""
        return np.bincount(self.flat_codes.ravel(),
                           weights=np.repeat(self.weights, self.schema.n_attributes),
                           minlength=self.schema.width)

    def collapsed(self) -> tuple["Dataset", np.ndarray]:
        """Merge duplicate rows into weights; also return the row -> unique-row map."""
        uniq, inverse = np.unique(self.codes, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        w = np.bincount(inverse, weights=self.weights, minlength=uniq.shape[0])
        return Dataset(self.schema, uniq, w), inverse

    def permuted(self, order: Sequence[int]) -> "Dataset":
        return Dataset(self.schema.permuted(order), self.codes[:, list(order)], self.weights)


@dataclass
class Component:
    """One mixture component stored as weighted counts per attribute."""

    counts: list
    effective_size: float
    prior: float

    def __post_init__(self):
        self.counts = [np.asarray(c, dtype=np.float64) for c in self.counts]
        for m, c in enumerate(self.counts):
            if np.any(c < 0):
                raise ValueError(f"negative count in attribute {m}")
            if not math.isclose(c.sum(), self.effective_size, rel_tol=_SUM_RTOL, abs_tol=1e-300):
                raise ValueError(
                    f"attribute {m} counts sum to {c.sum()}, expected {self.effective_size}")

    def distribution(self, m: int, smoothing: float = 0.0) -> np.ndarray:
        c = self.counts[m]
        return (c + smoothing) / (self.effective_size + smoothing * c.size)


def component_probability(c: Component, m: int, v: int, smoothing: float = 0.0) -> float:
    """Smoothed Pr(value v of attribute m | component)."""
    counts = c.counts[m]
    if not 0 <= v < counts.size:
        raise CodeRangeError(f"code {v} outside [0, {counts.size}) for attribute {m}")
    denom = c.effective_size + smoothing * counts.size
    if denom <= 0:
        raise ValueError("effective size plus smoothing must be positive")
    return float((counts[v] + smoothing) / denom)


def record_likelihood(c: Component, x: Sequence[int], smoothing: float = 0.0) -> float:
    """Log Pr(x | component) under attribute independence; -inf on a zero factor."""
    if len(x) != len(c.counts):
        raise ValueError("record length does not match component attributes")
    total = 0.0
    for m, v in enumerate(x):
        p = component_probability(c, m, int(v), smoothing)
        if p == 0.0:
            return -math.inf
        total += math.log(p)
    return total


def normalize_log(logits: np.ndarray) -> tuple[np.ndarray, bool]:
    """Max-subtracted softmax; a row with no finite entry becomes uniform.

    Returns the normalized probabilities and whether any row was degenerate.
    """
    logits = np.asarray(logits, dtype=np.float64)
    top = np.max(logits, axis=-1, keepdims=True)
    dead = ~np.isfinite(top)
    safe_top = np.where(dead, 0.0, top)
    with np.errstate(invalid="ignore"):
        e = np.exp(logits - safe_top)
    e = np.where(dead, 1.0, e)
    return e / e.sum(axis=-1, keepdims=True), bool(dead.any())


@dataclass(eq=False)
class MixtureModel:
    """k components over a schema, held as (k, D) count arrays."""

    schema: Schema
    counts: np.ndarray
    sizes: np.ndarray
    priors: np.ndarray
    log_likelihood: float = math.nan
    converged: bool = False
    em_iterations: int = 0
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        self.counts = np.array(self.counts, dtype=np.float64, ndmin=2)
        self.sizes = np.array(self.sizes, dtype=np.float64, ndmin=1)
        self.priors = np.array(self.priors, dtype=np.float64, ndmin=1)
        k = self.counts.shape[0]
        if k < 1:
            raise ValueError("a mixture needs at least one component")
        if self.counts.shape[1] != self.schema.width or self.sizes.shape != (k,) \
                or self.priors.shape != (k,):
            raise ValueError("counts, sizes and priors disagree on shape")
        if abs(self.priors.sum() - 1.0) > 1e-9:
            raise ValueError(f"priors sum to {self.priors.sum()}, expected 1")

    @classmethod
    def from_components(cls, schema: Schema, components: Sequence[Component], **kw) -> "MixtureModel":
        counts = np.stack([np.concatenate(c.counts) for c in components])
        return cls(schema, counts, [c.effective_size for c in components],
                   [c.prior for c in components], **kw)

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    def component(self, i: int) -> Component:
        return Component(self.schema.split(self.counts[i]), float(self.sizes[i]), float(self.priors[i]))

    @property
    def components(self) -> list:
        return [self.component(i) for i in range(self.k)]

    def smoothing_for(self, smoothing: Optional[float]) -> np.ndarray:
        """Per-component pseudo-counts; ``None`` means relative to effective size."""
        if smoothing is None:
            return DEFAULT_RELATIVE_SMOOTHING * self.sizes
        return np.full(self.k, float(smoothing))

    def log_tables(self, smoothing: Optional[float] = None) -> np.ndarray:
        """(k, D) table of log Pr(column value | component)."""
        s = self.smoothing_for(smoothing)[:, None]
        card = self.schema.column_cardinality[None, :]
        denom = self.sizes[:, None] + s * card
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(self.counts + s) - np.log(denom)
        # a component with no mass at all reads as uniform
        return np.where(denom <= 0, -np.log(card), out)

    def select(self, keep: Sequence[int]) -> "MixtureModel":
        """Sub-model with the given components, priors renormalized."""
        keep = list(keep)
        pri = self.priors[keep]
        total = pri.sum()
        pri = pri / total if total > 0 else np.full(len(keep), 1.0 / len(keep))
        return MixtureModel(self.schema, self.counts[keep].copy(), self.sizes[keep].copy(), pri)


def posterior(model: MixtureModel, x: Sequence[int], smoothing: Optional[float] = None) -> np.ndarray:
    """Pr(component | x) for a single encoded record, computed in log space."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (model.schema.n_attributes,):
        raise ValueError("record length does not match schema")
    if np.any(x < 0) or np.any(x >= model.schema.cardinalities):
        raise CodeRangeError("record code outside schema range")
    logtab = model.log_tables(smoothing)
    with np.errstate(divide="ignore"):
        logits = np.log(model.priors) + logtab[:, x + model.schema.offsets[:-1]].sum(axis=1)
    post, degenerate = normalize_log(logits)
    if degenerate:
        warnings.warn("record has zero probability under every component",
                      DegenerateEvidenceWarning, stacklevel=2)
    return post


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    k: int
    posteriors: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValueError("labels outside [0, k)")
        if self.posteriors is not None:
            p = np.asarray(self.posteriors, dtype=np.float64)
            if p.shape != (self.labels.size, self.k):
                raise ValueError("posterior matrix shape mismatch")
            if not np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-9):
                raise ValueError("posterior rows must sum to one")
            self.posteriors = p

    @property
    def max_posterior(self) -> np.ndarray:
        if self.posteriors is None:
            return np.ones(self.labels.size)
        return self.posteriors[np.arange(self.labels.size), self.labels]

    def sizes(self, weights: Optional[np.ndarray] = None) -> np.ndarray:
        return np.bincount(self.labels, weights=weights, minlength=self.k)
