# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels; must match tonedisc.kernels.py_impl exactly."""

import numpy as np


def match_counts_batch(const unsigned char[:, :, ::1] masks,
                       const int[:, :, ::1] shifted):
    """counts[b, c, d] = sum_n masks[b, n, shifted[c, d, n]]."""
    cdef Py_ssize_t nblk = masks.shape[0]
    cdef Py_ssize_t nsym = masks.shape[1]
    cdef Py_ssize_t ncand = shifted.shape[0]
    cdef Py_ssize_t nshift = shifted.shape[1]
    if shifted.shape[2] != nsym:
        raise ValueError("codeword length mismatch")
    out = np.zeros((nblk, ncand, nshift), dtype=np.int32)
    cdef int[:, :, ::1] counts = out
    cdef Py_ssize_t b, c, d, n
    cdef int acc
    for b in range(nblk):
        for c in range(ncand):
            for d in range(nshift):
                acc = 0
                for n in range(nsym):
                    acc += masks[b, n, shifted[c, d, n]]
                counts[b, c, d] = acc
    return out


def viterbi_decode(const double[:, ::1] llrs,
                   const int[:, ::1] prev,
                   const signed char[:, ::1] sign0,
                   const signed char[:, ::1] sign1):
    """Soft Viterbi for the fixed 64-state rate-1/2 code, state-0 terminated.

    Table layout and tie-breaking (ties pick choice 0) follow py_impl.
    """
    cdef Py_ssize_t nblk = llrs.shape[0]
    if llrs.shape[1] % 2:
        raise ValueError("llrs must have even length")
    cdef Py_ssize_t length = llrs.shape[1] // 2
    out = np.empty((nblk, length), dtype=np.uint8)
    cdef unsigned char[:, ::1] bits = out
    surv_arr = np.empty((length, 64), dtype=np.uint8)
    cdef unsigned char[:, ::1] surv = surv_arr
    cdef double[64] metric
    cdef double[64] nxt
    cdef double a, bl, c0, c1
    cdef Py_ssize_t blk, t, ns
    cdef int state, j
    for blk in range(nblk):
        for ns in range(64):
            metric[ns] = -1e30
        metric[0] = 0.0
        for t in range(length):
            a = llrs[blk, 2 * t]
            bl = llrs[blk, 2 * t + 1]
            for ns in range(64):
                c0 = metric[prev[ns, 0]] + a * sign0[ns, 0] + bl * sign1[ns, 0]
                c1 = metric[prev[ns, 1]] + a * sign0[ns, 1] + bl * sign1[ns, 1]
                if c1 > c0:
                    nxt[ns] = c1
                    surv[t, ns] = 1
                else:
                    nxt[ns] = c0
                    surv[t, ns] = 0
            for ns in range(64):
                metric[ns] = nxt[ns]
        state = 0
        for t in range(length - 1, -1, -1):
            bits[blk, t] = state >> 5
            j = surv[t, state]
            state = ((state & 31) << 1) | j
    return out
