"""Pure-Python/numpy versions of the hot loops.

Signatures match ``_ckernels``; ``ipd_lab.kernels`` picks one at import time.
"""
from __future__ import annotations

import numpy as np

from .rng import MASK128, MULTIPLIER, _TWO_M53, _xsl_rr

BACKEND = "python"


def cesaro_exact(M, v1, n, w):
    """Running Cesaro averages of ``v^k = v^1 M^(k-1)`` for ``k = 1..n``.

    Also returns the partial sums ``sum_{j<=k} <v^j . w>``.
    """
    M = np.ascontiguousarray(M, dtype=np.float64)
    v = np.array(v1, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    avgs = np.empty((n, 4))
    sums = np.empty(n)
    total = np.zeros(4)
    dot_sum = 0.0
    for k in range(n):
        total += v
        dot_sum += v @ w
        avgs[k] = total / (k + 1)
        sums[k] = dot_sum
        v = v @ M
    return avgs, sums


def markov_path(M, v1, n, state_hi, state_lo, inc_hi, inc_lo):
    """Empirical outcome frequencies along one sampled path of ``n`` rounds.

    Draws one PCG64 double per round: the first picks the initial outcome
    from ``v1``, later ones pick the successor from the current row of ``M``.
    """
    M = np.asarray(M, dtype=np.float64)
    cum = np.empty((4, 4))
    for i in range(4):
        s = 0.0
        for j in range(4):
            s += M[i, j]
            cum[i, j] = s
    c0 = []
    s = 0.0
    for j in range(4):
        s += float(v1[j])
        c0.append(s)
    cum_rows = [list(r) for r in cum]

    state = (state_hi << 64) | state_lo
    inc = (inc_hi << 64) | inc_lo
    counts = [0, 0, 0, 0]
    freqs = np.empty((n, 4))
    row = c0
    for k in range(n):
        state = (state * MULTIPLIER + inc) & MASK128
        u = (_xsl_rr(state) >> 11) * _TWO_M53
        nxt = 3
        for j in range(3):
            if u < row[j]:
                nxt = j
                break
        counts[nxt] += 1
        inv = 1.0 / (k + 1)
        freqs[k, 0] = counts[0] * inv
        freqs[k, 1] = counts[1] * inv
        freqs[k, 2] = counts[2] * inv
        freqs[k, 3] = counts[3] * inv
        row = cum_rows[nxt]
    return freqs


def _field(A, pi):
    a_ipi = A @ pi
    return pi * (a_ipi - pi @ a_ipi)


def replicator_rk4(A, pi0, dt, nsteps, record_every, tol):
    """Classical RK4 for ``dpi_i/dt = pi_i (A_i.pi - pi.A.pi)``.

    After each step negative entries are clipped and the state renormalized.
    Coordinates that start at zero stay exactly zero. Stops early when the
    largest velocity component drops below ``tol``.

    Returns ``(records, steps_done, converged)``; ``records`` holds the state
    at step 0, every ``record_every`` steps, and the final step.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    pi = np.array(pi0, dtype=np.float64)
    support = pi > 0.0
    out = [pi.copy()]
    steps = [0]
    converged = False
    k = 0
    while k < nsteps:
        k1 = _field(A, pi)
        if np.max(np.abs(k1)) < tol:
            converged = True
            break
        k2 = _field(A, pi + 0.5 * dt * k1)
        k3 = _field(A, pi + 0.5 * dt * k2)
        k4 = _field(A, pi + dt * k3)
        pi = pi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        pi[~support] = 0.0
        np.maximum(pi, 0.0, out=pi)
        pi /= pi.sum()
        k += 1
        if k % record_every == 0:
            out.append(pi.copy())
            steps.append(k)
    if steps[-1] != k:
        out.append(pi.copy())
        steps.append(k)
    return np.array(out), np.array(steps, dtype=np.int64), k, converged
