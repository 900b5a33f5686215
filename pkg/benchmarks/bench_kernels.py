"""Time one fused E+M pass with the compiled and the NumPy/SciPy kernels.

    python benchmarks/bench_kernels.py --sizes 10000,100000 --k 10 --threads 1,4
"""
import argparse
import csv
import sys
import time

import numpy as np

from galileo import kernels
from galileo.anneal import initialize
from galileo.synth import SynthSpec, generate


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="10000,100000,1000000")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--threads", default="1,4")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--csv", default=None, help="also write results here")
    args = p.parse_args(argv)

    sizes = [int(float(s)) for s in args.sizes.split(",")]
    threads = [int(t) for t in args.threads.split(",")]
    backends = kernels.available()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback will be timed", file=sys.stderr)

    rows = []
    for n in sizes:
        ds, _ = generate(SynthSpec(n, seed=0))
        model = initialize(ds, args.k, seed=0)
        logtab = model.log_tables()
        log_priors = np.log(model.priors)
        for t in threads:
            timing = {}
            for name, mod in backends.items():
                timing[name] = best_of(
                    lambda: mod.em_pass(ds.flat_codes, ds.weights, logtab, log_priors, t),
                    args.repeats)
            speedup = timing["python"] / timing["cython"] if "cython" in timing else float("nan")
            rows.append((n, t, timing.get("cython", float("nan")), timing["python"], speedup))
            print(f"N={n:<9d} threads={t:<3d} cython={rows[-1][2]*1e3:9.2f} ms  "
                  f"python={rows[-1][3]*1e3:9.2f} ms  speedup={speedup:6.1f}x", flush=True)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "threads", "cython_s", "python_s", "speedup"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
