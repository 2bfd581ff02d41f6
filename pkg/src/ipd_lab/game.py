"""Payoff parameters, memory-one strategies and the four-state outcome chain.

Outcomes are always indexed in the order ``cc, cd, dc, dd`` from the point of
view of player X (first letter is X's play).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConstraintViolation",
    "PayoffParams",
    "StrategyVector",
    "OUTCOMES",
    "CONVENTIONAL",
    "normalize",
    "expected_payoffs",
    "build_markov",
    "initial_distribution",
    "check_distribution",
    "payoff_arrays",
]

OUTCOMES = ("cc", "cd", "dc", "dd")

# entries this far outside [0, 1] are float noise and get clamped
CLAMP_TOL = 1e-12
DIST_TOL = 1e-12


class ConstraintViolation(ValueError):
    """Raised when an input violates a game or strategy constraint."""


@dataclass(frozen=True)
class PayoffParams:
    """Prisoner's Dilemma payoffs ``T > R > P > S`` with ``2R > T + S``.

    ``normalized`` marks the affine image with ``T = 1`` and ``S = 0``.
    """

    T: float
    R: float
    P: float
    S: float
    normalized: bool = False

    def __post_init__(self):
        T, R, P, S = self.T, self.R, self.P, self.S
        for name, ok in (
            ("T > R", T > R),
            ("R > P", R > P),
            ("P > S", P > S),
            ("2R > T + S", 2 * R > T + S),
        ):
            if not ok:
                raise ConstraintViolation(
                    f"payoffs (T,R,P,S)=({T},{R},{P},{S}) violate {name}"
                )
        if self.normalized and (T != 1 or S != 0):
            raise ConstraintViolation("normalized payoffs must have T=1 and S=0")

    @property
    def s_x(self) -> np.ndarray:
        """Payoff vector to X over (cc, cd, dc, dd)."""
        return np.array([self.R, self.S, self.T, self.P])

    @property
    def s_y(self) -> np.ndarray:
        return np.array([self.R, self.T, self.S, self.P])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.T, self.R, self.P, self.S)


CONVENTIONAL = PayoffParams(5.0, 3.0, 1.0, 0.0)


def normalize(params: PayoffParams) -> PayoffParams:
    """Map payoffs affinely so that ``T = 1`` and ``S = 0``.

    The map is increasing, so every comparison between expected payoffs is
    preserved. Normalizing an already normalized game returns an equal game.
    """
    T, R, P, S = params.as_tuple()
    span = T - S
    return PayoffParams(1.0, (R - S) / span, (P - S) / span, 0.0, normalized=True)


def payoff_arrays(params) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(T, R, P, S)`` from a :class:`PayoffParams` or an array of shape ``(..., 4)``.

    Array input lets predicates run over many games at once; each row is
    checked against the same inequalities as :class:`PayoffParams`.
    """
    if isinstance(params, PayoffParams):
        return tuple(np.float64(x) for x in params.as_tuple())
    arr = np.asarray(params, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ConstraintViolation(f"payoff array needs a last axis of length 4, got {arr.shape}")
    T, R, P, S = arr[..., 0], arr[..., 1], arr[..., 2], arr[..., 3]
    for name, ok in (("T > R", T > R), ("R > P", R > P), ("P > S", P > S),
                     ("2R > T + S", 2 * R > T + S)):
        if not np.all(ok):
            raise ConstraintViolation(f"payoff array violates {name}")
    return T, R, P, S


def _clamp_prob(x: float, what: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x < -CLAMP_TOL or x > 1 + CLAMP_TOL:
        raise ConstraintViolation(f"{what}={x!r} is not a probability")
    return min(max(x, 0.0), 1.0)


@dataclass(frozen=True)
class StrategyVector:
    """A memory-one strategy.

    ``p[i]`` is the probability of cooperating after outcome ``OUTCOMES[i]``
    seen from the player's own perspective. ``init_coop`` is the probability of
    cooperating in the first round.
    """

    p: tuple[float, float, float, float]
    init_coop: float = 1.0
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = tuple(self.p)
        if len(p) != 4:
            raise ConstraintViolation(f"strategy needs 4 entries, got {len(p)}")
        p = tuple(_clamp_prob(x, f"p{i + 1}") for i, x in enumerate(p))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "init_coop", _clamp_prob(self.init_coop, "init_coop"))
        arr = np.array(p)
        arr.setflags(write=False)
        object.__setattr__(self, "_arr", arr)

    @property
    def array(self) -> np.ndarray:
        return self._arr

    @property
    def agreeable(self) -> bool:
        return self.p[0] == 1.0

    @property
    def firm(self) -> bool:
        return self.p[3] == 0.0

    @property
    def generous(self) -> bool:
        return self.p[1] > 0.0 and self.p[3] > 0.0

    @property
    def is_repeat(self) -> bool:
        return self.p == (1.0, 1.0, 0.0, 0.0)

    def with_init(self, init_coop: float) -> "StrategyVector":
        return StrategyVector(self.p, init_coop)

    def mix(self, other: "StrategyVector", t: float) -> "StrategyVector":
        """Return ``t * self + (1 - t) * other`` (initial play of ``self``)."""
        arr = t * self._arr + (1.0 - t) * other.array
        return StrategyVector(tuple(arr), self.init_coop)


def _as_array(s) -> np.ndarray:
    if isinstance(s, StrategyVector):
        return s.array
    arr = np.asarray(s, dtype=float)
    if arr.shape != (4,):
        raise ConstraintViolation(f"expected a 4-vector, got shape {arr.shape}")
    return arr


def check_distribution(v, tol: float = DIST_TOL) -> np.ndarray:
    """Validate a distribution over the four outcomes and return it as an array."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (4,):
        raise ConstraintViolation(f"distribution must have 4 entries, got {arr.shape}")
    if np.any(arr < -tol) or abs(arr.sum() - 1.0) > tol:
        raise ConstraintViolation(f"{arr.tolist()} is not a probability distribution")
    return arr


def expected_payoffs(v, params: PayoffParams) -> tuple[float, float]:
    """Expected one-round payoffs ``(s_X, s_Y)`` under outcome distribution ``v``."""
    v = check_distribution(v)
    return float(v @ params.s_x), float(v @ params.s_y)


def build_markov(p, q) -> np.ndarray:
    """Transition matrix of the outcome chain when X plays ``p`` and Y plays ``q``.

    Y sees ``cd`` and ``dc`` swapped, so its response vector is
    ``(q1, q3, q2, q4)``.
    """
    x = _as_array(p)
    qa = _as_array(q)
    y = qa[[0, 2, 1, 3]]
    M = np.empty((4, 4))
    M[:, 0] = x * y
    M[:, 1] = x * (1.0 - y)
    M[:, 2] = (1.0 - x) * y
    M[:, 3] = (1.0 - x) * (1.0 - y)
    return M


def initial_distribution(p_c: float, q_c: float) -> np.ndarray:
    """Outcome distribution of the first round from independent initial plays."""
    p_c = _clamp_prob(p_c, "p_c")
    q_c = _clamp_prob(q_c, "q_c")
    return np.array(
        [p_c * q_c, p_c * (1.0 - q_c), (1.0 - p_c) * q_c, (1.0 - p_c) * (1.0 - q_c)]
    )
