# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled EM kernels.

Records are split into ``n_threads`` contiguous chunks; every chunk owns its
own accumulation buffers and the buffers are merged in chunk order, so a
fixed thread count always gives bit-identical results.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef void _em_chunk(const int* codes, const double* weights, const double* logtab_t,
                    const double* log_priors, Py_ssize_t start, Py_ssize_t stop,
                    Py_ssize_t M, Py_ssize_t K, double* counts_t, double* sizes,
                    double* scratch, double* ll_out, Py_ssize_t* ndeg_out) noexcept nogil:
    cdef Py_ssize_t a, m, i
    cdef const double* row
    cdef double* crow
    cdef double mx, tot, wa, ll = 0.0
    cdef Py_ssize_t ndeg = 0
    for a in range(start, stop):
        for i in range(K):
            scratch[i] = log_priors[i]
        for m in range(M):
            row = logtab_t + codes[a * M + m] * K
            for i in range(K):
                scratch[i] += row[i]
        mx = -INFINITY
        for i in range(K):
            if scratch[i] > mx:
                mx = scratch[i]
        wa = weights[a]
        if mx == -INFINITY:
            ndeg += 1
            ll = -INFINITY
            for i in range(K):
                scratch[i] = 1.0 / K
        else:
            tot = 0.0
            for i in range(K):
                scratch[i] = exp(scratch[i] - mx)
                tot += scratch[i]
            ll += wa * (mx + log(tot))
            for i in range(K):
                scratch[i] = wa * scratch[i] / tot
        for i in range(K):
            sizes[i] += scratch[i]
        for m in range(M):
            crow = counts_t + codes[a * M + m] * K
            for i in range(K):
                crow[i] += scratch[i]
    ll_out[0] = ll
    ndeg_out[0] = ndeg


cdef void _post_chunk(const int* codes, const double* logtab_t, const double* log_priors,
                      Py_ssize_t start, Py_ssize_t stop, Py_ssize_t M, Py_ssize_t K,
                      double* post, double* rec_ll, Py_ssize_t* ndeg_out) noexcept nogil:
    cdef Py_ssize_t a, m, i
    cdef const double* row
    cdef double* s
    cdef double mx, tot
    cdef Py_ssize_t ndeg = 0
    for a in range(start, stop):
        s = post + a * K
        for i in range(K):
            s[i] = log_priors[i]
        for m in range(M):
            row = logtab_t + codes[a * M + m] * K
            for i in range(K):
                s[i] += row[i]
        mx = -INFINITY
        for i in range(K):
            if s[i] > mx:
                mx = s[i]
        if mx == -INFINITY:
            ndeg += 1
            rec_ll[a] = -INFINITY
            for i in range(K):
                s[i] = 1.0 / K
        else:
            tot = 0.0
            for i in range(K):
                s[i] = exp(s[i] - mx)
                tot += s[i]
            rec_ll[a] = mx + log(tot)
            for i in range(K):
                s[i] = s[i] / tot
    ndeg_out[0] = ndeg


def _bounds(Py_ssize_t n, int n_threads):
    cdef Py_ssize_t c, chunks = max(1, min(n_threads, n))
    return np.array([c * n // chunks for c in range(chunks + 1)], dtype=np.intp)


def em_pass(flat_codes, weights, logtab, log_priors, int n_threads=1):
    """One fused E-step + M-step accumulation.

    Returns ``(counts (k, D), sizes (k,), log_likelihood, n_degenerate)`` where
    the log-likelihood is that of the *input* parameters.
    """
    cdef const int[:, ::1] codes = np.ascontiguousarray(flat_codes, dtype=np.int32)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] lt = np.ascontiguousarray(np.asarray(logtab, dtype=np.float64).T)
    cdef const double[::1] lp = np.ascontiguousarray(log_priors, dtype=np.float64)
    cdef Py_ssize_t N = codes.shape[0], M = codes.shape[1], D = lt.shape[0], K = lt.shape[1]
    cdef Py_ssize_t[::1] bounds = _bounds(N, n_threads)
    cdef Py_ssize_t nchunks = bounds.shape[0] - 1, c
    counts_np = np.zeros((nchunks, D, K))
    sizes_np = np.zeros((nchunks, K))
    scratch_np = np.zeros((nchunks, K))
    ll_np = np.zeros(nchunks)
    ndeg_np = np.zeros(nchunks, dtype=np.intp)
    cdef double[:, :, ::1] counts = counts_np
    cdef double[:, ::1] sizes = sizes_np
    cdef double[:, ::1] scratch = scratch_np
    cdef double[::1] ll = ll_np
    cdef Py_ssize_t[::1] ndeg = ndeg_np
    if N > 0:
        for c in prange(nchunks, nogil=True, schedule="static", chunksize=1,
                        num_threads=nchunks):
            _em_chunk(&codes[0, 0], &w[0], &lt[0, 0], &lp[0], bounds[c], bounds[c + 1],
                      M, K, &counts[c, 0, 0], &sizes[c, 0], &scratch[c, 0], &ll[c], &ndeg[c])
    total_counts = counts_np[0]
    total_sizes = sizes_np[0]
    total_ll = float(ll_np[0])
    for c in range(1, nchunks):
        total_counts += counts_np[c]
        total_sizes += sizes_np[c]
        total_ll += float(ll_np[c])
    return np.ascontiguousarray(total_counts.T), total_sizes, total_ll, int(ndeg_np.sum())


def posterior_pass(flat_codes, logtab, log_priors, int n_threads=1):
    """Posterior matrix (N, k), per-record log-likelihood (N,) and degenerate count."""
    cdef const int[:, ::1] codes = np.ascontiguousarray(flat_codes, dtype=np.int32)
    cdef const double[:, ::1] lt = np.ascontiguousarray(np.asarray(logtab, dtype=np.float64).T)
    cdef const double[::1] lp = np.ascontiguousarray(log_priors, dtype=np.float64)
    cdef Py_ssize_t N = codes.shape[0], M = codes.shape[1], K = lt.shape[1]
    cdef Py_ssize_t[::1] bounds = _bounds(N, n_threads)
    cdef Py_ssize_t nchunks = bounds.shape[0] - 1, c
    post_np = np.empty((N, K))
    rec_np = np.empty(N)
    ndeg_np = np.zeros(nchunks, dtype=np.intp)
    cdef double[:, ::1] post = post_np
    cdef double[::1] rec = rec_np
    cdef Py_ssize_t[::1] ndeg = ndeg_np
    if N > 0:
        for c in prange(nchunks, nogil=True, schedule="static", chunksize=1,
                        num_threads=nchunks):
            _post_chunk(&codes[0, 0], &lt[0, 0], &lp[0], bounds[c], bounds[c + 1], M, K,
                        &post[0, 0], &rec[0], &ndeg[c])
    return post_np, rec_np, int(ndeg_np.sum())
