# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are defined by ``_kernels_py``; keep them in sync."""
import numpy as np

from libc.stdint cimport uint64_t, int64_t

from .errors import DegreeOverflow

cdef extern from *:
    """
    #define HL_GOLDEN 0x9E3779B97F4A7C15ULL
    #define HL_MIX1 0xBF58476D1CE4E5B9ULL
    #define HL_MIX2 0x94D049BB133111EBULL
    #define HL_DEGREE_LIMIT (1LL << 62)
    """
    uint64_t HL_GOLDEN
    uint64_t HL_MIX1
    uint64_t HL_MIX2
    int64_t HL_DEGREE_LIMIT

cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * HL_MIX1
    z = (z ^ (z >> 27)) * HL_MIX2
    return z ^ (z >> 31)


def direction_hash(uint64_t seed, const int64_t[:] keys):
    cdef uint64_t h = _mix(seed + HL_GOLDEN)
    cdef Py_ssize_t i
    with nogil:
        for i in range(keys.shape[0]):
            h = _mix((h ^ <uint64_t>keys[i]) + HL_GOLDEN)
    return h


def unit_uniforms(uint64_t state, Py_ssize_t n):
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            state = state + HL_GOLDEN
            o[i] = <double>(_mix(state) >> 11) * INV53 * 2.0 - 1.0
    return out


def poly_mul(const int64_t[:] da, const double complex[:] ca,
             const int64_t[:] db, const double complex[:] cb,
             Py_ssize_t max_terms):
    cdef Py_ssize_t n = da.shape[0], m = db.shape[0]
    cdef Py_ssize_t i, j, idx, k, count
    cdef int64_t lo, hi, span, d
    cdef double ar, ai, br, bi
    if n == 0 or m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128)
    if da[n - 1] >= HL_DEGREE_LIMIT - db[m - 1]:
        raise DegreeOverflow("product degree exceeds int64 range")
    lo = da[0] + db[0]
    hi = da[n - 1] + db[m - 1]
    span = hi - lo + 1

    cdef double[:] accr
    cdef double[:] acci
    cdef int64_t[:] outd
    cdef double[:] outc
    cdef int64_t[:] pd
    cdef double[:] pr
    cdef double[:] pi
    cdef int64_t[:] order

    if span <= 4 * n * m + 64:
        accr_a = np.zeros(span, dtype=np.float64)
        acci_a = np.zeros(span, dtype=np.float64)
        accr = accr_a
        acci = acci_a
        for i in range(n):
            ar = ca[i].real
            ai = ca[i].imag
            for j in range(m):
                br = cb[j].real
                bi = cb[j].imag
                idx = <Py_ssize_t>(da[i] + db[j] - lo)
                accr[idx] = accr[idx] + (ar * br - ai * bi)
                acci[idx] = acci[idx] + (ar * bi + ai * br)
        count = 0
        for k in range(span):
            if accr[k] != 0.0 or acci[k] != 0.0:
                count += 1
        if count > max_terms:
            raise DegreeOverflow(f"product has {count} terms, cap is {max_terms}")
        outd_a = np.empty(count, dtype=np.int64)
        outc_a = np.empty(count, dtype=np.complex128)
        outd = outd_a
        outc = outc_a.view(np.float64)
        idx = 0
        for k in range(span):
            if accr[k] != 0.0 or acci[k] != 0.0:
                outd[idx] = lo + k
                outc[2 * idx] = accr[k]
                outc[2 * idx + 1] = acci[k]
                idx += 1
        return outd_a, outc_a

    # sparse path: stable sort of all pairwise products by degree keeps (i, j) order
    pd_a = np.empty(n * m, dtype=np.int64)
    pr_a = np.empty(n * m, dtype=np.float64)
    pi_a = np.empty(n * m, dtype=np.float64)
    pd = pd_a
    pr = pr_a
    pi = pi_a
    idx = 0
    for i in range(n):
        ar = ca[i].real
        ai = ca[i].imag
        for j in range(m):
            br = cb[j].real
            bi = cb[j].imag
            pd[idx] = da[i] + db[j]
            pr[idx] = ar * br - ai * bi
            pi[idx] = ar * bi + ai * br
            idx += 1
    order = np.argsort(pd_a, kind="stable").astype(np.int64)
    outd_a = np.empty(n * m, dtype=np.int64)
    outc_a = np.empty(n * m, dtype=np.complex128)
    outd = outd_a
    outc = outc_a.view(np.float64)
    count = 0
    k = 0
    while k < n * m:
        d = pd[order[k]]
        ar = 0.0
        ai = 0.0
        while k < n * m and pd[order[k]] == d:
            ar = ar + pr[order[k]]
            ai = ai + pi[order[k]]
            k += 1
        if ar != 0.0 or ai != 0.0:
            outd[count] = d
            outc[2 * count] = ar
            outc[2 * count + 1] = ai
            count += 1
    if count > max_terms:
        raise DegreeOverflow(f"product has {count} terms, cap is {max_terms}")
    return outd_a[:count].copy(), outc_a[:count].copy()
