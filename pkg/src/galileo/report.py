"""Cluster-by-label contingency tables and summary rows."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class Contingency:
    clusters: np.ndarray          # cluster ids, one per row
    classes: tuple                # label values, one per column (empty without labels)
    counts: np.ndarray            # (rows, classes) weighted counts
    sizes: np.ndarray             # weighted cluster sizes

    def pure(self) -> bool:
        if not self.classes:
            return True
        return bool(np.all(np.count_nonzero(self.counts, axis=1) <= 1))

    def rows(self) -> list:
        header = ["cluster", "size", *self.classes]
        body = [[int(c), _num(s), *(_num(v) for v in row)]
                for c, s, row in zip(self.clusters, self.sizes, self.counts)]
        total = ["total", _num(self.sizes.sum()), *(_num(v) for v in self.counts.sum(axis=0))]
        return [header, *body, total]


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else round(x, 6)


def contingency(labels, truth=None, weights=None, k: Optional[int] = None) -> Contingency:
    """Cross-tabulate hard cluster labels against ground-truth classes.

    Empty clusters are omitted.  Classes keep first-appearance order.
    """
    labels = np.asarray(labels, dtype=np.int64)
    w = np.ones(labels.size) if weights is None else np.asarray(weights, dtype=float)
    k = int(labels.max()) + 1 if k is None else k
    sizes = np.bincount(labels, weights=w, minlength=k)
    used = np.flatnonzero(sizes > 0)
    if truth is None:
        return Contingency(used, (), np.zeros((used.size, 0)), sizes[used])
    truth = np.asarray(truth, dtype=object)
    classes = tuple(dict.fromkeys(truth.tolist()))
    idx = {c: j for j, c in enumerate(classes)}
    t = np.fromiter((idx[v] for v in truth), dtype=np.int64, count=truth.size)
    table = np.zeros((k, len(classes)))
    np.add.at(table, (labels, t), w)
    return Contingency(used, classes, table[used], sizes[used])


def matched_agreement(labels, truth) -> float:
    """Fraction of records on the diagonal after optimal one-to-one cluster/class matching."""
    tab = contingency(labels, truth)
    if tab.counts.size == 0:
        return 0.0
    r, c = linear_sum_assignment(-tab.counts)
    return float(tab.counts[r, c].sum() / tab.counts.sum())


def to_csv(rows, path=None) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def to_text(rows) -> str:
    """Right-aligned plain-text table."""
    cells = [[str(v) for v in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(cells[0]))]
    return "\n".join("  ".join(v.rjust(wd) for v, wd in zip(r, widths)) for r in cells) + "\n"


def summary_rows(dataset_name: str, k: int, cu: Optional[float], mean_density: float) -> list:
    return [["dataset", "k", "category_utility", "mean_density"],
            [dataset_name, k, "" if cu is None else round(cu, 6), round(mean_density, 6)]]
