"""Terminal sets, stationary and limit distributions of the four-state chain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .game import OUTCOMES, StrategyVector, build_markov, check_distribution
from .rng import PCG64

__all__ = [
    "NumericFailure",
    "NotConvergentToCC",
    "TerminalSetAnalysis",
    "HittingTimes",
    "strongly_connected_components",
    "terminal_sets",
    "absorption_probabilities",
    "limit_distribution",
    "cesaro_rollout",
    "telescoping_sums",
    "hitting_times",
    "press_dyson_residual",
]

SOLVE_COND_LIMIT = 1e10
FALLBACK_STEPS = 100_000


class NumericFailure(ArithmeticError):
    """A linear solve was too ill-conditioned to trust."""


class NotConvergentToCC(ValueError):
    """Raised when ``{cc}`` is not the unique terminal set."""


@dataclass(frozen=True)
class TerminalSetAnalysis:
    terminal_sets: tuple[tuple[int, ...], ...]
    transient_states: tuple[int, ...]
    stationary: tuple[np.ndarray, ...]
    convergent: bool

    def names(self) -> list[list[str]]:
        return [[OUTCOMES[i] for i in J] for J in self.terminal_sets]


@dataclass(frozen=True)
class HittingTimes:
    """Expected number of rounds to reach ``cc`` from each other outcome."""

    T_cd: float
    T_dc: float
    T_dd: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.T_cd, self.T_dc, self.T_dd)


def strongly_connected_components(adj: np.ndarray) -> list[tuple[int, ...]]:
    """Tarjan's algorithm on a boolean adjacency matrix.

    Components come out in reverse topological order, each sorted; the result
    only depends on ``adj``.
    """
    n = adj.shape[0]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[tuple[int, ...]] = []
    counter = 0

    def visit(v: int) -> None:
        nonlocal counter
        index[v] = low[v] = counter
        counter += 1
        stack.append(v)
        on_stack[v] = True
        for w in range(n):
            if not adj[v, w]:
                continue
            if index[w] == -1:
                visit(w)
                low[v] = min(low[v], low[w])
            elif on_stack[w]:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack[w] = False
                comp.append(w)
                if w == v:
                    break
            comps.append(tuple(sorted(comp)))

    for v in range(n):
        if index[v] == -1:
            visit(v)
    return comps


def _stationary_on(M: np.ndarray, J: tuple[int, ...]) -> np.ndarray:
    k = len(J)
    sub = M[np.ix_(J, J)]
    # (sub^T - I) x = 0 plus the normalization row
    lhs = np.vstack([sub.T - np.eye(k), np.ones((1, k))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    v = np.zeros(4)
    v[list(J)] = x
    return v


def terminal_sets(M) -> TerminalSetAnalysis:
    """Find the terminal (closed communicating) classes of ``M``.

    An edge ``i -> j`` exists iff ``M[i, j] > 0``. Entries of the outcome
    chain are products of probabilities, so no cancellation blurs exact zeros.
    """
    M = np.asarray(M, dtype=float)
    adj = M > 0.0
    comps = strongly_connected_components(adj)
    terminal = []
    for comp in comps:
        inside = set(comp)
        closed = all(not adj[i, j] for i in comp for j in range(4) if j not in inside)
        if closed:
            terminal.append(comp)
    terminal.sort()
    recurrent = {i for J in terminal for i in J}
    transient = tuple(i for i in range(4) if i not in recurrent)
    stationary = tuple(_stationary_on(M, J) for J in terminal)
    return TerminalSetAnalysis(tuple(terminal), transient, stationary, len(terminal) == 1)


def absorption_probabilities(M, v1, analysis: TerminalSetAnalysis | None = None) -> np.ndarray:
    """Probability of ending in each terminal set, starting from ``v1``.

    Uses the fundamental matrix ``(I - Q)^-1`` on the transient states. If
    that block is too ill-conditioned, falls back to iterating the chain.
    """
    M = np.asarray(M, dtype=float)
    v1 = check_distribution(v1)
    if analysis is None:
        analysis = terminal_sets(M)
    sets = analysis.terminal_sets
    probs = np.array([v1[list(J)].sum() for J in sets])
    tr = list(analysis.transient_states)
    if not tr:
        return probs
    Q = M[np.ix_(tr, tr)]
    R = np.column_stack([M[np.ix_(tr, list(J))].sum(axis=1) for J in sets])
    lhs = np.eye(len(tr)) - Q
    if np.linalg.cond(lhs) > SOLVE_COND_LIMIT:
        return _absorption_by_iteration(M, v1, sets)
    B = np.linalg.solve(lhs, R)
    return probs + v1[tr] @ B


def _absorption_by_iteration(M, v1, sets) -> np.ndarray:
    v = np.array(v1, dtype=float)
    for _ in range(FALLBACK_STEPS):
        v = v @ M
    probs = np.array([v[list(J)].sum() for J in sets])
    leftover = 1.0 - probs.sum()
    if abs(leftover) > 1e-10:
        raise NumericFailure(
            f"transient mass {leftover:.3g} remains after {FALLBACK_STEPS} steps"
        )
    return probs / probs.sum()


def limit_distribution(M, v1, analysis: TerminalSetAnalysis | None = None) -> np.ndarray:
    """Cesaro limit of the outcome distributions started at ``v1``.

    This is the mixture of the terminal-set stationary distributions weighted
    by the absorption probabilities.
    """
    M = np.asarray(M, dtype=float)
    if analysis is None:
        analysis = terminal_sets(M)
    probs = absorption_probabilities(M, v1, analysis)
    v = np.zeros(4)
    for pJ, vJ in zip(probs, analysis.stationary):
        v += pJ * vJ
    return v


def _coerce_strategy(s) -> np.ndarray:
    return s.array if isinstance(s, StrategyVector) else np.asarray(s, dtype=float)


def cesaro_rollout(p, q, v1, n: int, mode: str = "exact", seed: int = 0) -> np.ndarray:
    """Running averages of outcome distributions over the first ``n`` rounds.

    ``mode="exact"`` iterates the distribution; ``mode="montecarlo"`` samples
    one play path with a PCG64 stream seeded by ``seed`` and returns empirical
    outcome frequencies. Row ``k`` of the result averages rounds ``1..k+1``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    M = build_markov(_coerce_strategy(p), _coerce_strategy(q))
    v1 = check_distribution(v1)
    if mode == "exact":
        avgs, _ = kernels.cesaro_exact(M, v1, n, np.zeros(4))
        return avgs
    if mode == "montecarlo":
        rng = PCG64(seed)
        return kernels.markov_path(M, v1, n, *rng.split_state())
    raise ValueError(f"unknown rollout mode {mode!r}")


def telescoping_sums(M, v1, w, n: int) -> np.ndarray:
    """Partial sums ``sum_{k<=m} <v^k . w>`` for ``m = 1..n`` along the exact chain."""
    _, sums = kernels.cesaro_exact(np.asarray(M, dtype=float), check_distribution(v1), n,
                                   np.asarray(w, dtype=float))
    return sums


def hitting_times(M) -> HittingTimes:
    """Expected rounds to reach ``cc`` from ``cd``, ``dc`` and ``dd``.

    Solves ``(M - I)_t T = -1`` on the three non-``cc`` states.
    """
    M = np.asarray(M, dtype=float)
    analysis = terminal_sets(M)
    if analysis.terminal_sets != ((0,),):
        raise NotConvergentToCC(
            f"terminal sets are {analysis.names()}; hitting times need {{cc}} alone"
        )
    Mt = M[1:, 1:] - np.eye(3)
    if np.linalg.cond(Mt) > SOLVE_COND_LIMIT:
        raise NumericFailure("hitting-time system is ill-conditioned")
    T = np.linalg.solve(Mt, -np.ones(3))
    return HittingTimes(*map(float, T))


def press_dyson_residual(v, p_tilde) -> float:
    """``<v . p_tilde>``; zero for every limit distribution against that player."""
    return float(np.dot(np.asarray(v, dtype=float), np.asarray(p_tilde, dtype=float)))
