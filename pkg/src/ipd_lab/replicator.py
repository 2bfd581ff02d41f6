"""Roster payoff matrices and replicator dynamics on the simplex.

The background reproduction rate cancels out of the replicator equation and
is not represented.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .game import (ConstraintViolation, PayoffParams, StrategyVector, build_markov,
                   expected_payoffs, initial_distribution)
from .markov import limit_distribution, terminal_sets
from .pressdyson import ZdsPoint, zds_top

__all__ = [
    "INIT_DEP_TOL",
    "CONVERGENCE_TOL",
    "RosterEntry",
    "Roster",
    "PayoffMatrix",
    "payoff_matrix",
    "closed_form_matrix",
    "replicator_field",
    "degeneracy",
    "Trajectory",
    "integrate",
    "EssReport",
    "detect_ess_eus",
    "ess_neighborhood",
    "DominationStep",
    "domination_analysis",
    "verify_domination_sequence",
    "NoInteriorEquilibrium",
    "Equilibrium2",
    "interior_equilibrium_2",
    "ZeroSumSetup",
    "zero_sum_dynamics",
    "xi_rate",
]

INIT_DEP_TOL = 1e-9
CONVERGENCE_TOL = 1e-10
DEGENERACY_TOL = 1e-12
ESS_TOL = 1e-12


@dataclass(frozen=True)
class RosterEntry:
    name: str
    strategy: StrategyVector
    zds_point: ZdsPoint | None = None


class Roster:
    """Ordered list of named strategies with unique names."""

    def __init__(self, entries: Sequence[RosterEntry]):
        entries = list(entries)
        if not entries:
            raise ConstraintViolation("a roster needs at least one strategy")
        names = [e.name for e in entries]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise ConstraintViolation(f"duplicate strategy names: {', '.join(dup)}")
        self.entries = entries

    @classmethod
    def from_points(cls, points: Sequence[ZdsPoint], params: PayoffParams,
                    names: Sequence[str] | None = None, init_coop: float = 1.0) -> "Roster":
        """Roster of ZDS top strategies, each tagged with its strip point."""
        if names is None:
            names = [f"z{i}" for i in range(len(points))]
        return cls([RosterEntry(n, zds_top(pt, params, init_coop=init_coop), pt)
                    for n, pt in zip(names, points)])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no strategy named {name!r} in roster") from None

    @property
    def all_zds(self) -> bool:
        return all(e.zds_point is not None for e in self.entries)


@dataclass
class PayoffMatrix:
    """``A[i, j]``: long-run payoff to an ``i``-player against a ``j``-player."""

    A: np.ndarray
    names: list[str]
    init_dependent: np.ndarray
    method: str = "markov"

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _threads() -> int:
    env = os.environ.get("IPD_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConstraintViolation(f"IPD_LAB_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


def _cell(p: StrategyVector, q: StrategyVector, params: PayoffParams) -> tuple[float, bool]:
    M = build_markov(p, q)
    analysis = terminal_sets(M)
    v = limit_distribution(M, initial_distribution(p.init_coop, q.init_coop), analysis)
    s_x, _ = expected_payoffs(v, params)
    dependent = False
    if not analysis.convergent:
        # compare against the four pure starting outcomes
        vals = [expected_payoffs(limit_distribution(M, np.eye(4)[k], analysis), params)[0]
                for k in range(4)]
        dependent = max(vals) - min(vals) > INIT_DEP_TOL
    return s_x, dependent


def payoff_matrix(roster: Roster, params: PayoffParams, method: str = "markov",
                  threads: int | None = None) -> PayoffMatrix:
    """Long-run payoff matrix over the roster.

    ``method="markov"`` solves each cell's chain from both players' declared
    initial plays and flags cells whose payoff would change with a different
    start. ``method="closed"`` uses the ZDS closed form and needs every entry
    tagged with its strip point.
    """
    if method == "closed":
        return closed_form_matrix(roster, params)
    if method != "markov":
        raise ValueError(f"unknown payoff-matrix method {method!r}")
    n = len(roster)
    cells = [(i, j) for i in range(n) for j in range(n)]
    strategies = [e.strategy for e in roster]

    def work(ij):
        return _cell(strategies[ij[0]], strategies[ij[1]], params)

    workers = threads if threads is not None else _threads()
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    A = np.array([r[0] for r in results]).reshape(n, n)
    dep = np.array([r[1] for r in results]).reshape(n, n)
    return PayoffMatrix(A, roster.names, dep, "markov")


def closed_form_matrix(roster: Roster, params: PayoffParams | None = None) -> PayoffMatrix:
    """``A_ij = K_ij (alpha_bar_j - beta_bar_i)``, ``K_ij = 1 / (beta_bar_i beta_bar_j - alpha_bar_i alpha_bar_j)``.

    Vertex-against-Vertex cells are 1/2.
    """
    if not roster.all_zds:
        missing = [e.name for e in roster if e.zds_point is None]
        raise ConstraintViolation(f"closed form needs ZDS points for every entry; missing: {missing}")
    pts = [e.zds_point for e in roster]
    if params is not None:
        for pt in pts:
            pt.check_strip(params)
    a = np.array([pt.alpha_bar for pt in pts])
    b = np.array([pt.beta_bar for pt in pts])
    vert = np.array([pt.is_vertex() for pt in pts])
    det = np.outer(b, b) - np.outer(a, a)
    both = np.outer(vert, vert)
    det = np.where(both, 1.0, det)
    A = (a[None, :] - b[:, None]) / det
    A[both] = 0.5
    n = len(pts)
    return PayoffMatrix(A, roster.names, np.zeros((n, n), dtype=bool), "closed")


def _matrix(A) -> np.ndarray:
    return np.asarray(A.A if isinstance(A, PayoffMatrix) else A, dtype=float)


def replicator_field(pi, A) -> np.ndarray:
    """``dpi_i/dt = pi_i (A_i.pi - pi.A.pi)``."""
    A = _matrix(A)
    pi = np.asarray(pi, dtype=float)
    a_ipi = A @ pi
    return pi * (a_ipi - pi @ a_ipi)


def degeneracy(A, tol: float = DEGENERACY_TOL) -> str | None:
    """Report rosters whose dynamics is frozen everywhere.

    Returns ``"constant"`` when every entry is equal (one value line),
    ``"column_constant"`` when ``A_ij`` depends only on ``j`` (for instance all
    equalizers), else ``None``.
    """
    A = _matrix(A)
    if np.ptp(A) <= tol:
        return "constant"
    if np.all(np.ptp(A, axis=0) <= tol):
        return "column_constant"
    return None


@dataclass
class Trajectory:
    t: np.ndarray
    pi: np.ndarray
    a_pp: np.ndarray
    xi_pi: np.ndarray | None
    steps: int
    converged: bool
    mode: str = "standard"
    frozen: str | None = None

    @property
    def final(self) -> np.ndarray:
        return self.pi[-1]

    def tail(self, fraction: float = 0.1) -> dict[str, np.ndarray]:
        """Mean, min and max of each coordinate over the last ``fraction`` of time."""
        t_end = self.t[-1]
        mask = self.t >= t_end * (1.0 - fraction)
        block = self.pi[mask]
        return {"mean": block.mean(axis=0), "min": block.min(axis=0), "max": block.max(axis=0)}


def integrate(pi0, A, dt: float = 0.01, t_max: float = 500.0, mode: str = "standard",
              xi=None, record_every: int = 1, tol: float = CONVERGENCE_TOL,
              check_degenerate: bool = True) -> Trajectory:
    """Fixed-step classical RK4 for the replicator equation.

    After every step negative entries are clipped and the state renormalized
    to the simplex; coordinates that start at zero stay exactly zero.
    Integration stops early once ``max |dpi/dt| < tol``.

    ``mode="zerosum"`` replaces ``A`` by ``S = A - A^T``. ``xi`` (one value per
    strategy) adds the record ``xi_pi = sum pi_i xi_i``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    A = _matrix(A)
    pi0 = np.asarray(pi0, dtype=float)
    if pi0.shape != (A.shape[0],):
        raise ConstraintViolation(f"pi0 has {pi0.size} entries for a {A.shape[0]}-strategy matrix")
    if np.any(pi0 < 0) or abs(pi0.sum() - 1.0) > 1e-12:
        raise ConstraintViolation("pi0 must be a probability vector")
    if mode == "zerosum":
        G = A - A.T
    elif mode == "standard":
        G = A
    else:
        raise ValueError(f"unknown mode {mode!r}")
    frozen = degeneracy(G) if check_degenerate else None
    nsteps = int(round(t_max / dt))
    if frozen is not None:
        recs = pi0[None, :].copy()
        step_idx = np.array([0])
        done, converged = 0, True
    else:
        recs, step_idx, done, converged = kernels.replicator_rk4(G, pi0, dt, nsteps, record_every, tol)
    a_pp = np.einsum("ki,ij,kj->k", recs, A, recs)
    xi_pi = recs @ np.asarray(xi, dtype=float) if xi is not None else None
    return Trajectory(step_idx * dt, recs, a_pp, xi_pi, int(done), bool(converged), mode, frozen)


class EssReport(NamedTuple):
    kind: str
    margins: np.ndarray


def detect_ess_eus(A, i: int, tol: float = ESS_TOL) -> EssReport:
    """``ess`` if ``A_ji < A_ii`` for every ``j != i``, ``eus`` if all ``>``.

    ``margins[j] = A_ii - A_ji`` (``nan`` at ``j = i``).
    """
    A = _matrix(A)
    m = A[i, i] - A[:, i]
    m[i] = np.nan
    others = np.delete(m, i)
    if np.all(others > tol):
        kind = "ess"
    elif np.all(others < -tol):
        kind = "eus"
    else:
        kind = "neither"
    return EssReport(kind, m)


def ess_neighborhood(A, i: int, kind: str = "ess", eps0: float = 0.05, samples: int = 200,
                     seed: int = 0, min_eps: float = 1e-6) -> float | None:
    """Largest ``eps = eps0 / 2^k`` where ``dpi_i/dt`` has the expected sign.

    Checks random states with ``1 - eps <= pi_i < 1``; positive velocity for an
    ESS, negative for an EUS. Returns ``None`` if no such ``eps`` is found.
    """
    A = _matrix(A)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    sign = 1.0 if kind == "ess" else -1.0
    eps = eps0
    while eps >= min_eps:
        ok = True
        for _ in range(samples):
            rest = rng.dirichlet(np.ones(n - 1))
            share = eps * rng.uniform(1e-3, 1.0)
            pi = np.insert(rest * share, i, 1.0 - share)
            if not sign * replicator_field(pi, A)[i] > 0:
                ok = False
                break
        if ok:
            return eps
        eps /= 2
    return None


class DominationStep(NamedTuple):
    j: int
    m: float
    M: float
    eps: float


def _dominates(A, i: int, j: int, J: list[int]) -> float:
    diff = A[i, J] - A[j, J]
    return float(diff.min())


def domination_analysis(A, i: int) -> list[DominationStep] | None:
    """Greedy search for a sequence of strategies that ``i`` dominates.

    At each stage ``i`` must dominate the next strategy strictly in the set of
    strategies not yet removed. Domination persists in subsets, so any
    dominated candidate can be removed first; ties go to the lowest index.
    Each step carries the margins ``m``, ``M`` and the bound
    ``eps = m / (m + M)``.
    """
    A = _matrix(A)
    n = A.shape[0]
    J = list(range(n))
    out = []
    while len(J) > 1:
        step = None
        for j in J:
            if j == i:
                continue
            m = _dominates(A, i, j, J)
            if m > 0:
                step = (j, m)
                break
        if step is None:
            return None
        j, m = step
        outside = [k for k in range(n) if k not in J]
        M = float(np.max(np.abs(A[i, outside] - A[j, outside]))) if outside else 0.0
        out.append(DominationStep(j, m, M, m / (m + M)))
        J.remove(j)
    return out


def verify_domination_sequence(A, i: int, seq: Sequence[int]) -> bool:
    """Check directly that ``i`` dominates ``seq`` in the given order."""
    A = _matrix(A)
    J = list(range(A.shape[0]))
    if sorted(list(seq) + [i]) != J:
        return False
    for j in seq:
        if not _dominates(A, i, j, J) > 0:
            return False
        J.remove(j)
    return True


class NoInteriorEquilibrium(ValueError):
    """The two-strategy game has no equilibrium with both strategies present."""


class Equilibrium2(NamedTuple):
    w_star: float
    stable: bool
    slope: float


def interior_equilibrium_2(A) -> Equilibrium2:
    """Interior rest point of ``dw/dt = w (1 - w) [(A11 - A21) w + (A12 - A22)(1 - w)]``.

    The equilibrium is stable when the bracket decreases in ``w``.
    """
    A = _matrix(A)
    if A.shape != (2, 2):
        raise ConstraintViolation("interior_equilibrium_2 needs a 2x2 matrix")
    d1 = A[0, 0] - A[1, 0]
    d2 = A[1, 1] - A[0, 1]
    if d1 == 0 or d2 == 0 or np.sign(d1) != np.sign(d2):
        raise NoInteriorEquilibrium(
            f"A11 - A21 = {d1:.6g} and A22 - A12 = {d2:.6g} do not share a strict sign"
        )
    r = d2 / d1
    w = r / (1.0 + r)
    slope = d1 + d2
    return Equilibrium2(float(w), bool(slope < 0), float(slope))


@dataclass
class ZeroSumSetup:
    S: np.ndarray
    xi: np.ndarray
    K: np.ndarray
    A: np.ndarray = field(repr=False)


def zero_sum_dynamics(roster: Roster, params: PayoffParams | None = None) -> ZeroSumSetup:
    """``S_ij = K_ij (xi_j - xi_i)`` with ``xi_i = alpha_bar_i + beta_bar_i = -1/Z_i``."""
    if not roster.all_zds:
        missing = [e.name for e in roster if e.zds_point is None]
        raise ConstraintViolation(f"zero-sum dynamics needs ZDS entries only; not ZDS: {missing}")
    pts = [e.zds_point for e in roster]
    if params is not None:
        for pt in pts:
            pt.check_strip(params)
    a = np.array([pt.alpha_bar for pt in pts])
    b = np.array([pt.beta_bar for pt in pts])
    xi = a + b
    vert = np.array([pt.is_vertex() for pt in pts])
    both = np.outer(vert, vert)
    det = np.where(both, 1.0, np.outer(b, b) - np.outer(a, a))
    K = 1.0 / det
    S = K * (xi[None, :] - xi[:, None])
    S[both] = 0.0
    A = closed_form_matrix(roster).A
    return ZeroSumSetup(S, xi, K, A)


def xi_rate(pi, setup: ZeroSumSetup) -> float:
    """``d xi_pi / dt = -1/2 sum pi_i pi_j K_ij (xi_i - xi_j)^2`` (never positive)."""
    pi = np.asarray(pi, dtype=float)
    d = setup.xi[:, None] - setup.xi[None, :]
    return float(-0.5 * pi @ (setup.K * d * d) @ pi)
