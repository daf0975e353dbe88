# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled collapsed-Gibbs sweep.

Must stay arithmetically identical to :mod:`emrlda._fallback` so both
backends produce the same assignments from the same uniforms.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def sweep(const int[::1] word, const int[::1] doc, int[::1] z,
          long long[:, ::1] n_dt, long long[:, ::1] n_tw, long long[::1] n_t,
          double alpha, double beta, const double[::1] uniforms):
    """Resample every token once, in array order, updating counts in place."""
    cdef Py_ssize_t n_tokens = z.shape[0]
    cdef int K = <int>n_t.shape[0]
    cdef int V = <int>n_tw.shape[1]
    cdef double vbeta = V * beta
    cdef double[::1] cum = np.empty(K, dtype=np.float64)
    cdef Py_ssize_t i
    cdef int t, old, new, d, w
    cdef double total, u
    if uniforms.shape[0] < n_tokens:
        raise ValueError("need one uniform per token")
    with nogil:
        for i in range(n_tokens):
            d = doc[i]
            w = word[i]
            old = z[i]
            n_dt[d, old] -= 1
            n_tw[old, w] -= 1
            n_t[old] -= 1
            total = 0.0
            for t in range(K):
                total = total + (n_dt[d, t] + alpha) * (n_tw[t, w] + beta) / (n_t[t] + vbeta)
                cum[t] = total
            u = uniforms[i] * total
            new = K - 1
            for t in range(K):
                if u < cum[t]:
                    new = t
                    break
            z[i] = new
            n_dt[d, new] += 1
            n_tw[new, w] += 1
            n_t[new] += 1
