"""NumPy/SciPy fallback for the compiled EM kernels.

Same signatures and chunking contract as the Cython module: records are split
into ``n_threads`` contiguous partitions whose partial sums are merged in
partition order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import sparse

_BLOCK = 1 << 15


def _one_hot(codes: np.ndarray, width: int) -> sparse.csr_matrix:
    n, m = codes.shape
    return sparse.csr_matrix(
        (np.ones(n * m), codes.ravel(), np.arange(0, n * m + 1, m)), shape=(n, width))


def _joint(codes, logtab, log_priors):
    x = _one_hot(codes, logtab.shape[1])
    return np.asarray(x @ logtab.T) + log_priors, x


def _normalize(joint):
    top = joint.max(axis=1, keepdims=True)
    dead = ~np.isfinite(top[:, 0])
    top[dead] = 0.0
    with np.errstate(invalid="ignore"):
        e = np.exp(joint - top)
    e[dead] = 1.0
    tot = e.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore"):
        rec_ll = top[:, 0] + np.log(tot[:, 0])
    rec_ll[dead] = -np.inf
    return e / tot, rec_ll, int(dead.sum())


def _bounds(n, n_threads):
    chunks = max(1, min(n_threads, n))
    return [c * n // chunks for c in range(chunks + 1)]


def _run(fn, n, n_threads):
    b = _bounds(n, n_threads)
    parts = list(zip(b[:-1], b[1:]))
    if len(parts) == 1:
        return [fn(*parts[0])]
    with ThreadPoolExecutor(len(parts)) as pool:
        return list(pool.map(lambda p: fn(*p), parts))


def em_pass(flat_codes, weights, logtab, log_priors, n_threads=1):
    codes = np.asarray(flat_codes)
    w = np.asarray(weights, dtype=np.float64)
    logtab = np.asarray(logtab, dtype=np.float64)
    log_priors = np.asarray(log_priors, dtype=np.float64)
    k, width = logtab.shape

    def part(lo, hi):
        counts = np.zeros((width, k))
        sizes = np.zeros(k)
        ll = 0.0
        ndeg = 0
        for s in range(lo, hi, _BLOCK):
            e = min(hi, s + _BLOCK)
            joint, x = _joint(codes[s:e], logtab, log_priors)
            post, rec_ll, nd = _normalize(joint)
            wp = post * w[s:e, None]
            counts += x.T @ wp
            sizes += wp.sum(axis=0)
            ll += float(np.dot(w[s:e], rec_ll)) if nd == 0 else -np.inf
            ndeg += nd
        return counts, sizes, ll, ndeg

    results = _run(part, codes.shape[0], n_threads)
    counts, sizes, ll, ndeg = results[0]
    for c, s, l, d in results[1:]:
        counts = counts + c
        sizes = sizes + s
        ll += l
        ndeg += d
    return np.ascontiguousarray(counts.T), sizes, float(ll), ndeg


def posterior_pass(flat_codes, logtab, log_priors, n_threads=1):
    codes = np.asarray(flat_codes)
    logtab = np.asarray(logtab, dtype=np.float64)
    log_priors = np.asarray(log_priors, dtype=np.float64)
    n = codes.shape[0]
    post = np.empty((n, logtab.shape[0]))
    rec = np.empty(n)

    def part(lo, hi):
        nd = 0
        for s in range(lo, hi, _BLOCK):
            e = min(hi, s + _BLOCK)
            joint, _ = _joint(codes[s:e], logtab, log_priors)
            post[s:e], rec[s:e], d = _normalize(joint)
            nd += d
        return nd

    ndeg = sum(_run(part, n, n_threads))
    return post, rec, ndeg
