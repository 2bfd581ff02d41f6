# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport uint64_t

cnp.import_array()

cdef extern from *:
    """
    typedef __uint128_t ipd_u128;
    static inline ipd_u128 ipd_make128(uint64_t hi, uint64_t lo) {
        return (((ipd_u128)hi) << 64) | (ipd_u128)lo;
    }
    static const ipd_u128 IPD_PCG_MULT =
        (((ipd_u128)0x2360ED051FC65DA4ULL) << 64) | (ipd_u128)0x4385DF649FCCF645ULL;
    static inline uint64_t ipd_pcg_next(ipd_u128 *state, ipd_u128 inc) {
        *state = *state * IPD_PCG_MULT + inc;
        uint64_t x = (uint64_t)(*state >> 64) ^ (uint64_t)(*state);
        unsigned rot = (unsigned)(*state >> 122);
        return (x >> rot) | (x << ((-rot) & 63));
    }
    """
    ctypedef struct ipd_u128:
        pass
    ipd_u128 ipd_make128(uint64_t hi, uint64_t lo) nogil
    uint64_t ipd_pcg_next(ipd_u128 *state, ipd_u128 inc) nogil

BACKEND = "cython"

cdef double TWO_M53 = 1.0 / 9007199254740992.0


def cesaro_exact(M, v1, Py_ssize_t n, w):
    cdef double[:, ::1] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[4] v
    cdef double[4] nv
    cdef double[4] total
    cdef double dot_sum = 0.0, inv
    cdef Py_ssize_t k, i, j
    avgs_arr = np.empty((n, 4), dtype=np.float64)
    sums_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] avgs = avgs_arr
    cdef double[::1] sums = sums_arr
    for i in range(4):
        v[i] = float(v1[i])
        total[i] = 0.0
    with nogil:
        for k in range(n):
            inv = 1.0 / (k + 1)
            for i in range(4):
                total[i] += v[i]
                avgs[k, i] = total[i] * inv
            dot_sum += v[0] * wv[0] + v[1] * wv[1] + v[2] * wv[2] + v[3] * wv[3]
            sums[k] = dot_sum
            for j in range(4):
                nv[j] = v[0] * m[0, j] + v[1] * m[1, j] + v[2] * m[2, j] + v[3] * m[3, j]
            for j in range(4):
                v[j] = nv[j]
    return avgs_arr, sums_arr


def markov_path(M, v1, Py_ssize_t n, uint64_t state_hi, uint64_t state_lo,
                uint64_t inc_hi, uint64_t inc_lo):
    cdef double[:, ::1] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef double[5][4] cum
    cdef double s, u, inv
    cdef Py_ssize_t i, j, k
    cdef int row = 4, nxt
    cdef long long[4] counts
    cdef ipd_u128 state = ipd_make128(state_hi, state_lo)
    cdef ipd_u128 inc = ipd_make128(inc_hi, inc_lo)
    freqs_arr = np.empty((n, 4), dtype=np.float64)
    cdef double[:, ::1] freqs = freqs_arr
    for i in range(4):
        s = 0.0
        for j in range(4):
            s += m[i, j]
            cum[i][j] = s
        counts[i] = 0
    # row 4 holds the initial distribution
    s = 0.0
    for j in range(4):
        s += float(v1[j])
        cum[4][j] = s
    with nogil:
        for k in range(n):
            u = (ipd_pcg_next(&state, inc) >> 11) * TWO_M53
            nxt = 3
            for j in range(3):
                if u < cum[row][j]:
                    nxt = <int>j
                    break
            counts[nxt] += 1
            inv = 1.0 / (k + 1)
            for j in range(4):
                freqs[k, j] = counts[j] * inv
            row = nxt
    return freqs_arr


cdef inline void _field(double[:, ::1] a, double *pi, double *out, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double acc, mean = 0.0
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += a[i, j] * pi[j]
        out[i] = acc
        mean += pi[i] * acc
    for i in range(n):
        out[i] = pi[i] * (out[i] - mean)


def replicator_rk4(A, pi0, double dt, Py_ssize_t nsteps, Py_ssize_t record_every,
                   double tol):
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    work_arr = np.zeros((7, n), dtype=np.float64)
    cdef double[:, ::1] work = work_arr
    cdef double *pi = &work[0, 0]
    cdef double *k1 = &work[1, 0]
    cdef double *k2 = &work[2, 0]
    cdef double *k3 = &work[3, 0]
    cdef double *k4 = &work[4, 0]
    cdef double *tmp = &work[5, 0]
    cdef double *supp = &work[6, 0]
    cdef Py_ssize_t i, k = 0
    cdef double vmax, total
    cdef bint converged = False
    n_rec = nsteps // record_every + 2
    rec_arr = np.empty((n_rec, n), dtype=np.float64)
    steps_arr = np.empty(n_rec, dtype=np.int64)
    cdef double[:, ::1] rec = rec_arr
    cdef long long[::1] steps = steps_arr
    cdef Py_ssize_t r = 0
    for i in range(n):
        pi[i] = float(pi0[i])
        supp[i] = 1.0 if pi[i] > 0.0 else 0.0
        rec[0, i] = pi[i]
    steps[0] = 0
    r = 1
    with nogil:
        while k < nsteps:
            _field(a, pi, k1, n)
            vmax = 0.0
            for i in range(n):
                if fabs(k1[i]) > vmax:
                    vmax = fabs(k1[i])
            if vmax < tol:
                converged = True
                break
            for i in range(n):
                tmp[i] = pi[i] + 0.5 * dt * k1[i]
            _field(a, tmp, k2, n)
            for i in range(n):
                tmp[i] = pi[i] + 0.5 * dt * k2[i]
            _field(a, tmp, k3, n)
            for i in range(n):
                tmp[i] = pi[i] + dt * k3[i]
            _field(a, tmp, k4, n)
            total = 0.0
            for i in range(n):
                pi[i] = pi[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if supp[i] == 0.0 or pi[i] < 0.0:
                    pi[i] = 0.0
                total += pi[i]
            for i in range(n):
                pi[i] = pi[i] / total
            k += 1
            if k % record_every == 0:
                for i in range(n):
                    rec[r, i] = pi[i]
                steps[r] = k
                r += 1
    if steps[r - 1] != k:
        for i in range(n):
            rec[r, i] = pi[i]
        steps[r] = k
        r += 1
    return rec_arr[:r].copy(), steps_arr[:r].copy(), k, bool(converged)
