"""Wall-clock scaling of a full anneal against the number of records."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .anneal import AnnealConfig, anneal
from .synth import SynthSpec, generate

DEFAULT_SIZES = (1_000, 10_000, 100_000, 1_000_000)


@dataclass(frozen=True)
class Timing:
    n: int
    median: float
    runs: tuple

    @property
    def spread(self) -> float:
        """(max - min) / median over the repeats."""
        return (max(self.runs) - min(self.runs)) / self.median if self.median > 0 else 0.0


def time_anneal(dataset, config: AnnealConfig, repeats: int = 3) -> Timing:
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        anneal(dataset, config)
        runs.append(time.perf_counter() - t0)
    return Timing(dataset.n_records, float(np.median(runs)), tuple(runs))


def run_scaling(sizes=DEFAULT_SIZES, config: AnnealConfig = AnnealConfig(kmax=10),
                synth: SynthSpec = SynthSpec(1), repeats: int = 3, progress=None) -> list:
    """Median anneal time per size; dataset generation is excluded from the timing."""
    out = []
    for n in sizes:
        ds, _ = generate(replace(synth, n_records=int(n)))
        t = time_anneal(ds, config, repeats)
        if progress is not None:
            progress(t)
        out.append(t)
    return out


def loglog_slope(timings, min_n: int = 1_000) -> float:
    pts = [(t.n, t.median) for t in timings if t.n >= min_n and t.median > 0]
    if len(pts) < 2:
        raise ValueError("need at least two sizes to fit a slope")
    x, y = np.log(np.array(pts, dtype=float)).T
    return float(np.polyfit(x, y, 1)[0])
