# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Same signatures as ``cursekit._kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport qsort, malloc, calloc, free
from libc.math cimport fabs, pow

ctypedef unsigned long long u64

cdef int _cmp_u64(const void* x, const void* y) noexcept nogil:
    cdef u64 a = (<u64*>x)[0]
    cdef u64 b = (<u64*>y)[0]
    return (a > b) - (a < b)


cdef inline int _popcount(u64 x) noexcept nogil:
    return __builtin_popcountll(x)

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def subset_nonhit_sum(cnp.uint64_t[::1] masks, int d, double w_smooth, double w0, double w1):
    """Sum over u of w_smooth^(d-|u|) * sum over non-hit v in u of w0^|v| w1^(|u|-|v|)."""
    cdef Py_ssize_t M = masks.shape[0]
    cdef Py_ssize_t i, k, m
    cdef u64 u, nu = (<u64>1) << d
    cdef int size, distinct
    cdef double inner, term, total = 0.0, comp = 0.0, t, y
    binom = np.zeros((d + 1, d + 1))
    pw = np.zeros((d + 1, d + 1))
    ws = np.zeros(d + 1)
    for m in range(d + 1):
        ws[m] = w_smooth ** (d - m)
        for k in range(m + 1):
            binom[m, k] = float(__import__("math").comb(m, k))
            pw[m, k] = (w0 ** k) * (w1 ** (m - k))
    cdef double[:, ::1] B = binom
    cdef double[:, ::1] P = pw
    cdef double[::1] WS = ws
    # small d: dedupe projections with a stamp table indexed by v; else sort
    cdef bint use_table = d <= 24
    cdef u64* buf = <u64*>malloc((M + 1) * sizeof(u64))
    cdef long* cnt = <long*>malloc((d + 1) * sizeof(long))
    cdef unsigned int* seen = NULL
    cdef u64 v
    if use_table:
        seen = <unsigned int*>calloc(nu, sizeof(unsigned int))
    if buf == NULL or cnt == NULL or (use_table and seen == NULL):
        free(buf); free(cnt); free(seen)
        raise MemoryError()
    try:
        with nogil:
            for u in range(nu):
                size = _popcount(u)
                for k in range(size + 1):
                    cnt[k] = 0
                if use_table:
                    for i in range(M):
                        v = masks[i] & u
                        if seen[v] != <unsigned int>(u + 1):
                            seen[v] = <unsigned int>(u + 1)
                            cnt[_popcount(v)] += 1
                else:
                    for i in range(M):
                        buf[i] = masks[i] & u
                    if M > 1:
                        qsort(buf, M, sizeof(u64), _cmp_u64)
                    for i in range(M):
                        if i == 0 or buf[i] != buf[i - 1]:
                            cnt[_popcount(buf[i])] += 1
                inner = 0.0
                for k in range(size + 1):
                    inner += (B[size, k] - cnt[k]) * P[size, k]
                term = WS[size] * inner
                # Neumaier compensated summation
                t = total + term
                if fabs(total) >= fabs(term):
                    comp += (total - t) + term
                else:
                    comp += (term - t) + total
                total = t
    finally:
        free(buf)
        free(cnt)
        free(seen)
    return total + comp


def abs_local_discrepancy_power(cnp.float64_t[:, ::1] nodes, cnp.float64_t[:, ::1] t,
                                double a, bint quadrant, double p):
    """|local discrepancy|^p at every row of ``t``."""
    cdef Py_ssize_t N = nodes.shape[0], n = t.shape[0], d = t.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double vol, tj, y, lo, hi, disc, invN = 1.0 / N if N > 0 else 0.0
    cdef long count
    cdef bint inside
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            vol = 1.0
            for j in range(d):
                tj = t[i, j]
                if quadrant:
                    vol *= tj if tj < a else 1.0 - tj
                else:
                    vol *= fabs(tj - a)
            count = 0
            for k in range(N):
                inside = True
                for j in range(d):
                    tj = t[i, j]
                    y = nodes[k, j]
                    if quadrant:
                        if tj < a:
                            inside = y < tj
                        else:
                            inside = y >= tj
                    else:
                        if tj < a:
                            lo = tj; hi = a
                        else:
                            lo = a; hi = tj
                        inside = lo <= y and y < hi
                    if not inside:
                        break
                if inside:
                    count += 1
            disc = count * invN - vol
            o[i] = pow(fabs(disc), p)
    return out
