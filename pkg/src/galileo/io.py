"""CSV ingestion, categorical encoding and model/assignment serialization."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ModelFormatError, ParseError
from .model import AttributeSpec, ClusterAssignment, Dataset, MixtureModel, Schema

MISSING = "?"
MODEL_FORMAT = "galileo-mixture"
MODEL_VERSION = 1


@dataclass(frozen=True)
class IngestConfig:
    delimiter: str = ","
    header_row: bool = True
    label_column: Union[str, int, None] = None
    missing_policy: str = "category"  # or "drop"
    numeric_bins: Optional[int] = None
    missing_token: str = MISSING

    def __post_init__(self):
        if self.missing_policy not in ("category", "drop"):
            raise ValueError("missing_policy must be 'category' or 'drop'")
        if self.numeric_bins is not None and self.numeric_bins < 2:
            raise ValueError("numeric_bins must be >= 2")


def _read_rows(path, config: IngestConfig):
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        rows = [r for r in csv.reader(fh, delimiter=config.delimiter) if r]
    if not rows:
        raise ParseError(f"{path} is empty")
    if config.header_row:
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    else:
        header = [f"a{j}" for j in range(len(rows[0]))]
    if not rows:
        raise ParseError(f"{path} has a header but no records")
    width = len(header)
    for i, r in enumerate(rows):
        if len(r) != width:
            line = i + 1 + int(config.header_row)
            raise ParseError(f"{path}: row {line} has {len(r)} fields, expected {width}")
    return header, [[v.strip() for v in r] for r in rows]


def _label_index(header, label) -> Optional[int]:
    if label is None:
        return None
    if isinstance(label, int):
        if not -len(header) <= label < len(header):
            raise ParseError(f"label column {label} out of range")
        return label % len(header)
    if label in header:
        return header.index(label)
    if str(label).lstrip("-").isdigit():
        return _label_index(header, int(label))
    raise ParseError(f"label column {label!r} not found in header")


def _as_float(values, missing):
    try:
        return np.array([math.nan if v == missing else float(v) for v in values])
    except ValueError:
        return None


def equal_frequency_bins(x: np.ndarray, bins: int) -> tuple[np.ndarray, list]:
    """Quantile cut points for ``x`` (NaN ignored); returns codes and interval labels."""
    finite = x[~np.isnan(x)]
    edges = np.unique(np.quantile(finite, np.linspace(0, 1, bins + 1)[1:-1]))
    codes = np.searchsorted(edges, x, side="right")
    bounds = [-math.inf, *edges.tolist(), math.inf]
    labels = [f"[{lo:g},{hi:g})" for lo, hi in zip(bounds[:-1], bounds[1:])]
    return codes, labels


def load_csv(path, config: IngestConfig = IngestConfig()):
    """Read a categorical CSV into a :class:`Dataset` plus optional label vector.

    Value dictionaries follow first appearance order.  The label column never
    enters the schema.
    """
    header, rows = _read_rows(path, config)
    label_idx = _label_index(header, config.label_column)
    cols = [j for j in range(len(header)) if j != label_idx]
    if not cols:
        raise ParseError("no attribute columns left after removing the label column")
    table = np.array(rows, dtype=object)
    if config.missing_policy == "drop":
        keep = ~np.any(table[:, cols] == config.missing_token, axis=1)
        table = table[keep]
        if table.shape[0] == 0:
            raise ParseError("every record has a missing value")

    specs, columns = [], []
    for j in cols:
        raw = table[:, j].tolist()
        numeric = _as_float(raw, config.missing_token) if config.numeric_bins else None
        if numeric is not None and np.isfinite(numeric).any():
            codes, labels = equal_frequency_bins(numeric, config.numeric_bins)
            raw = [config.missing_token if math.isnan(v) else labels[c]
                   for v, c in zip(numeric, codes)]
        values = list(dict.fromkeys(raw))
        lookup = {v: i for i, v in enumerate(values)}
        specs.append(AttributeSpec(header[j], tuple(values)))
        columns.append(np.fromiter((lookup[v] for v in raw), dtype=np.int32, count=len(raw)))
    schema = Schema(tuple(specs))
    dataset = Dataset(schema, np.column_stack(columns))
    labels = None if label_idx is None else np.array(table[:, label_idx].tolist(), dtype=object)
    return dataset, labels


def encode(schema: Schema, row: Sequence[str]) -> np.ndarray:
    return np.array([a.code(str(v)) for a, v in zip(schema.attributes, row)], dtype=np.int32)


def decode(schema: Schema, codes: Sequence[int]) -> list:
    return [a.values[int(c)] for a, c in zip(schema.attributes, codes)]


def save_csv(dataset: Dataset, path, labels=None, label_name: str = "label") -> None:
    """Write a dataset (and optional labels as the first column) as CSV with a header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        names = [a.name for a in dataset.schema.attributes]
        w.writerow(([label_name] if labels is not None else []) + names)
        for i, row in enumerate(dataset.codes):
            vals = decode(dataset.schema, row)
            w.writerow(([labels[i]] if labels is not None else []) + vals)


def model_to_dict(model: MixtureModel, trace=None) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "schema": [{"name": a.name, "values": list(a.values)} for a in model.schema.attributes],
        "log_likelihood": model.log_likelihood,
        "converged": model.converged,
        "em_iterations": model.em_iterations,
        "components": [
            {"prior": float(model.priors[i]),
             "effective_size": float(model.sizes[i]),
             "counts": [c.tolist() for c in model.schema.split(model.counts[i])]}
            for i in range(model.k)],
    }
    if trace is not None:
        doc["trace"] = {
            "selected_k": trace.selected_k,
            "levels": [dict(vars(lv)) for lv in trace.levels],
        }
    return doc


def model_from_dict(doc: dict) -> MixtureModel:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a galileo model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        schema = Schema(tuple(AttributeSpec(a["name"], tuple(a["values"])) for a in doc["schema"]))
        comps = doc["components"]
        counts = np.array([np.concatenate([np.asarray(c, dtype=float) for c in comp["counts"]])
                           for comp in comps])
        return MixtureModel(
            schema, counts,
            [comp["effective_size"] for comp in comps],
            [comp["prior"] for comp in comps],
            log_likelihood=float(doc.get("log_likelihood", math.nan)),
            converged=bool(doc.get("converged", False)),
            em_iterations=int(doc.get("em_iterations", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def save_model(model: MixtureModel, path, trace=None) -> None:
    _atomic_write(path, json.dumps(model_to_dict(model, trace), indent=1))


def load_model(path) -> MixtureModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path} is not valid JSON (truncated?): {exc}") from exc
    return model_from_dict(doc)


def write_assignments(assignment: ClusterAssignment, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["record", "cluster", "max_posterior"])
        for i, (c, p) in enumerate(zip(assignment.labels, assignment.max_posterior)):
            w.writerow([i, int(c), repr(float(p))])


def read_assignments(path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        labels = np.zeros(len(rows), dtype=np.int64)
        for r in rows:
            labels[int(r["record"])] = int(r["cluster"])
    except (OSError, KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"cannot read assignments from {path}: {exc}") from exc
    return labels


TRACE_FIELDS = ("k", "log_likelihood", "aic", "bic", "mean_density", "em_iterations")


def write_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for lv in trace.levels:
            w.writerow([repr(getattr(lv, f)) if isinstance(getattr(lv, f), float)
                        else getattr(lv, f) for f in TRACE_FIELDS])
