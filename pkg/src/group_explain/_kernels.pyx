# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: dense game values, coalitional double sums, two-step
evaluation, and the MIC free-axis dynamic program.

Mirrors ``_kernels_py`` exactly; covered by backend-equivalence tests.
"""

import numpy as np

from libc.math cimport INFINITY, log
from libc.stdlib cimport free, malloc

BACKEND = "compiled"

INTERMEDIATE_MODIFIED_QUOTIENT = 0
INTERMEDIATE_TSH = 1

cdef extern from *:
    int __builtin_popcountll(unsigned long long x) nogil


cdef inline int _popcount(long x) noexcept nogil:
    return __builtin_popcountll(<unsigned long long> x)


def lin_value_dense(const double[::1] table, const double[::1] wtable, int n):
    cdef Py_ssize_t size = table.shape[0]
    out_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_np
    cdef Py_ssize_t s
    cdef int i
    cdef long bit
    cdef double acc
    with nogil:
        for i in range(n):
            bit = <long> 1 << i
            acc = 0.0
            for s in range(size):
                if not (s & bit):
                    acc += wtable[s] * (table[s | bit] - table[s])
            out[i] = acc
    return out_np


def coalitional_direct_dense(const double[::1] table, int n, blocks,
                             const double[::1] outer_by_size, inner_by_size):
    cdef int m = len(blocks)
    out_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_np
    cdef long[::1] block_masks = np.asarray(blocks, dtype=np.int64)
    cdef Py_ssize_t nsub = <Py_ssize_t> 1 << (m - 1)
    cdef long *qmasks = <long *> malloc(nsub * sizeof(long))
    cdef long *tmasks = NULL
    cdef double[::1] inner_w
    cdef Py_ssize_t a, tsel
    cdef int j, k, li, sj, idx, p
    cdef long bj, low, qt, pbit
    cdef double acc, wq
    cdef int *players = <int *> malloc(n * sizeof(int))
    if qmasks == NULL or players == NULL:
        free(qmasks); free(players)
        raise MemoryError()
    try:
        for j in range(m):
            bj = block_masks[j]
            # union masks of subsets of the other blocks
            qmasks[0] = 0
            idx = 0
            for k in range(m):
                if k == j:
                    continue
                for a in range(<Py_ssize_t> 1 << idx):
                    qmasks[a | (<Py_ssize_t> 1 << idx)] = qmasks[a] | block_masks[k]
                idx += 1
            sj = 0
            for p in range(n):
                if bj >> p & 1:
                    players[sj] = p
                    sj += 1
            tmasks = <long *> malloc((<Py_ssize_t> 1 << sj) * sizeof(long))
            if tmasks == NULL:
                raise MemoryError()
            tmasks[0] = 0
            for li in range(sj):
                for a in range(<Py_ssize_t> 1 << li):
                    tmasks[a | (<Py_ssize_t> 1 << li)] = tmasks[a] | (<long> 1 << players[li])
            inner_w = inner_by_size[j]
            with nogil:
                for li in range(sj):
                    p = players[li]
                    pbit = <long> 1 << p
                    acc = 0.0
                    for a in range(<Py_ssize_t> 1 << (m - 1)):
                        wq = outer_by_size[_popcount(<long> a)]
                        for tsel in range(<Py_ssize_t> 1 << sj):
                            if tsel & (<Py_ssize_t> 1 << li):
                                continue
                            qt = qmasks[a] | tmasks[tsel]
                            acc += wq * inner_w[_popcount(<long> tsel)] \
                                * (table[qt | pbit] - table[qt])
                    out[p] = acc
            free(tmasks)
            tmasks = NULL
    finally:
        free(qmasks)
        free(players)
        free(tmasks)
    return out_np


def two_step_dense(const double[::1] table, int n, blocks,
                   const double[::1] h1_wtable, h2_wtables, int intermediate):
    cdef int m = len(blocks)
    out_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_np
    cdef long[::1] block_masks = np.asarray(blocks, dtype=np.int64)
    cdef Py_ssize_t nsub = <Py_ssize_t> 1 << m
    cdef long *unions = <long *> malloc(nsub * sizeof(long))
    cdef int *players = <int *> malloc(n * sizeof(int))
    cdef long *tmasks = NULL
    cdef double *vhat = NULL
    cdef double *vj = NULL
    cdef double[::1] w2
    cdef Py_ssize_t a, t, tsub
    cdef int j, li, sj, p
    cdef long jbit, low, bj, lbit
    cdef double acc, ratio, shift
    if unions == NULL or players == NULL:
        free(unions); free(players)
        raise MemoryError()
    unions[0] = 0
    for j in range(m):
        for a in range(<Py_ssize_t> 1 << j):
            unions[a | (<Py_ssize_t> 1 << j)] = unions[a] | block_masks[j]
    try:
        for j in range(m):
            bj = block_masks[j]
            jbit = <long> 1 << j
            sj = 0
            for p in range(n):
                if bj >> p & 1:
                    players[sj] = p
                    sj += 1
            tsub = <Py_ssize_t> 1 << sj
            tmasks = <long *> malloc(tsub * sizeof(long))
            vhat = <double *> malloc(nsub * sizeof(double))
            vj = <double *> malloc(tsub * sizeof(double))
            if tmasks == NULL or vhat == NULL or vj == NULL:
                raise MemoryError()
            tmasks[0] = 0
            for li in range(sj):
                for a in range(<Py_ssize_t> 1 << li):
                    tmasks[a | (<Py_ssize_t> 1 << li)] = tmasks[a] | (<long> 1 << players[li])
            w2 = h2_wtables[j]
            with nogil:
                for t in range(tsub):
                    if intermediate == 0:
                        for a in range(nsub):
                            if a & jbit:
                                vhat[a] = table[unions[a ^ jbit] | tmasks[t]]
                            else:
                                vhat[a] = table[unions[a]]
                    else:
                        ratio = (<double> _popcount(<long> t)) / sj
                        shift = table[tmasks[t]] - ratio * table[unions[jbit]]
                        for a in range(nsub):
                            vhat[a] = ratio * table[unions[a]] \
                                + _popcount(<long> a) * shift
                    acc = 0.0
                    for a in range(nsub):
                        if not (a & jbit):
                            acc += h1_wtable[a] * (vhat[a | jbit] - vhat[a])
                    vj[t] = acc
                for li in range(sj):
                    lbit = <long> 1 << li
                    acc = 0.0
                    for t in range(tsub):
                        if not (t & lbit):
                            acc += w2[t] * (vj[t | lbit] - vj[t])
                    out[players[li]] = acc
            free(tmasks); free(vhat); free(vj)
            tmasks = NULL; vhat = NULL; vj = NULL
    finally:
        free(unions)
        free(players)
        free(tmasks)
        free(vhat)
        free(vj)
    return out_np


def mic_optimize_free_axis(const long[::1] rows, const long[::1] bounds, int ell,
                           int tmax):
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t m = bounds.shape[0] - 1
    best_np = np.full(tmax + 1, -np.inf, dtype=np.float64)
    cdef double[::1] best = best_np
    cdef double *cum = <double *> malloc((m + 1) * ell * sizeof(double))
    cdef double *score = <double *> malloc((m + 1) * (m + 1) * sizeof(double))
    cdef double *dp_prev = <double *> malloc((m + 1) * sizeof(double))
    cdef double *dp_cur = <double *> malloc((m + 1) * sizeof(double))
    cdef Py_ssize_t b, i, s, sp, r
    cdef int t, tcap
    cdef double c, tot, acc, val, bestval
    if cum == NULL or score == NULL or dp_prev == NULL or dp_cur == NULL:
        free(cum); free(score); free(dp_prev); free(dp_cur)
        raise MemoryError()
    try:
        with nogil:
            for r in range(ell):
                cum[r] = 0.0
            for b in range(1, m + 1):
                for r in range(ell):
                    cum[b * ell + r] = cum[(b - 1) * ell + r]
                for i in range(bounds[b - 1], bounds[b]):
                    cum[b * ell + rows[i]] += 1.0
            for s in range(1, m + 1):
                for sp in range(s):
                    acc = 0.0
                    tot = 0.0
                    for r in range(ell):
                        c = cum[s * ell + r] - cum[sp * ell + r]
                        tot += c
                        if c > 0:
                            acc += c / n * log(c / n)
                    if tot > 0:
                        acc -= tot / n * log(tot / n)
                    score[sp * (m + 1) + s] = acc
            tcap = tmax if tmax < <int> m else <int> m
            for s in range(1, m + 1):
                dp_prev[s] = score[s]          # score[0 * (m+1) + s]
            if tcap >= 1:
                best[1] = dp_prev[m]
            for t in range(2, tcap + 1):
                for s in range(t, m + 1):
                    bestval = -INFINITY
                    for sp in range(t - 1, s):
                        val = dp_prev[sp] + score[sp * (m + 1) + s]
                        if val > bestval:
                            bestval = val
                    dp_cur[s] = bestval
                for s in range(t, m + 1):
                    dp_prev[s] = dp_cur[s]
                best[t] = dp_prev[m]
    finally:
        free(cum)
        free(score)
        free(dp_prev)
        free(dp_cur)
    return best_np
