"""Rule-based synthetic categorical data with known cluster labels."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AttributeSpec, Dataset, Schema


@dataclass(frozen=True)
class SynthSpec:
    n_records: int
    n_attributes: int = 10
    cardinality: int = 20
    n_rules: int = 5
    conformance: float = 0.97
    seed: int = 0

    def __post_init__(self):
        if self.n_records < 1:
            raise ValueError("n_records must be >= 1")
        if self.n_attributes < 1:
            raise ValueError("n_attributes must be >= 1")
        if self.cardinality < 2:
            raise ValueError("cardinality must be >= 2")
        if self.n_rules < 1:
            raise ValueError("n_rules must be >= 1")
        if not 0 < self.conformance <= 1:
            raise ValueError("conformance must lie in (0, 1]")

    @property
    def ruled_attributes(self) -> int:
        return math.ceil(self.n_attributes / 2)


@dataclass(frozen=True)
class Rule:
    attributes: tuple
    values: tuple


def make_rules(spec: SynthSpec, rng: np.random.Generator) -> list:
    rules = []
    for _ in range(spec.n_rules):
        attrs = np.sort(rng.choice(spec.n_attributes, size=spec.ruled_attributes, replace=False))
        vals = rng.integers(0, spec.cardinality, size=attrs.size)
        rules.append(Rule(tuple(int(a) for a in attrs), tuple(int(v) for v in vals)))
    return rules


def synth_schema(spec: SynthSpec) -> Schema:
    values = tuple(f"v{j}" for j in range(spec.cardinality))
    return Schema(tuple(AttributeSpec(f"a{m}", values) for m in range(spec.n_attributes)))


def generate(spec: SynthSpec) -> tuple[Dataset, np.ndarray]:
    """Draw ``spec.n_records`` records; returns the dataset and each record's rule index.

    Every record picks a rule uniformly.  Each attribute the rule fixes takes the
    rule's value with probability ``conformance`` and a uniform value otherwise;
    the rest are uniform.
    """
    rng = np.random.default_rng(spec.seed)
    rules = make_rules(spec, rng)
    n, m = spec.n_records, spec.n_attributes
    labels = rng.integers(0, spec.n_rules, size=n)
    codes = rng.integers(0, spec.cardinality, size=(n, m))
    conform = rng.random((n, m)) < spec.conformance
    fixed = np.full((spec.n_rules, m), -1)
    for r, rule in enumerate(rules):
        fixed[r, list(rule.attributes)] = rule.values
    target = fixed[labels]
    use = (target >= 0) & conform
    codes[use] = target[use]
    return Dataset(synth_schema(spec), codes.astype(np.int32)), labels
