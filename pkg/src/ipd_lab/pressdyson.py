"""Press-Dyson vectors and their coordinates in the ``{S_X, S_Y, 1, e23}`` basis.

All coordinate work assumes normalized payoffs (``T = 1``, ``S = 0``), where
``S_X = (R, 0, 1, P)`` and ``S_Y = (R, 1, 0, P)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .game import ConstraintViolation, PayoffParams, StrategyVector, _as_array, payoff_arrays

__all__ = [
    "E12",
    "E13",
    "E23",
    "TFT",
    "REPEAT",
    "GRIM",
    "LAME",
    "ALLC",
    "ALLD",
    "PAVLOV",
    "PressDysonCoords",
    "BarCoords",
    "ZdsPoint",
    "VERTEX",
    "ConstraintReport",
    "x_press_dyson",
    "y_press_dyson",
    "switch",
    "basis_matrix",
    "inverse_basis",
    "decompose",
    "recompose",
    "check_constraints",
    "top_strategy",
    "bar_coords",
    "complier_top",
    "zds_delta",
    "zds_top",
    "edge",
    "extortion_point",
    "complier_point",
    "equalizer_point",
]

E12 = np.array([1.0, 1.0, 0.0, 0.0])
E13 = np.array([1.0, 0.0, 1.0, 0.0])
E23 = np.array([0.0, 1.0, 1.0, 0.0])

TFT = StrategyVector((1, 0, 1, 0))
REPEAT = StrategyVector((1, 1, 0, 0))
GRIM = StrategyVector((1, 0, 0, 0))
LAME = StrategyVector((1, 1, 1, 0))
ALLC = StrategyVector((1, 1, 1, 1))
ALLD = StrategyVector((0, 0, 0, 0), init_coop=0.0)
PAVLOV = StrategyVector((1, 0, 0, 1))

ZDS_TOL = 1e-12
SIGN_TOL = 1e-12
VERTEX_TOL = 1e-12
SNAP_TOL = 1e-12


def _require_normalized(params: PayoffParams) -> None:
    if not (params.T == 1.0 and params.S == 0.0):
        raise ConstraintViolation("Press-Dyson coordinates need normalized payoffs")


class PressDysonCoords(NamedTuple):
    """``p_tilde = alpha S_X + beta S_Y + gamma 1 + delta e23``.

    Fields may be floats or equally shaped arrays.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float


class BarCoords(NamedTuple):
    alpha_bar: float
    beta_bar: float
    delta_bar: float
    Z: float


class ConstraintReport(NamedTuple):
    sign_ok: bool
    size_ok: bool
    structure_ok: bool


class ZdsPoint(NamedTuple):
    """A point ``(alpha_bar, beta_bar)`` of the ZDS strip."""

    alpha_bar: float
    beta_bar: float

    @property
    def Z(self) -> float:
        """Self-play payoff of the value line through this point."""
        return -1.0 / (self.alpha_bar + self.beta_bar)

    @property
    def xi(self) -> float:
        return self.alpha_bar + self.beta_bar

    def is_vertex(self, tol: float = VERTEX_TOL) -> bool:
        return abs(self.alpha_bar + 1.0) <= tol and abs(self.beta_bar + 1.0) <= tol

    def in_strip(self, params: PayoffParams, tol: float = SIGN_TOL) -> bool:
        """``x >= -1 >= y`` and ``-1/R >= x + y >= -1/P``."""
        _require_normalized(params)
        x, y = self.alpha_bar, self.beta_bar
        s = x + y
        return (
            x >= -1.0 - tol
            and y <= -1.0 + tol
            and s <= -1.0 / params.R + tol
            and s >= -1.0 / params.P - tol
        )

    def check_strip(self, params: PayoffParams) -> "ZdsPoint":
        if not self.in_strip(params):
            raise ConstraintViolation(
                f"point ({self.alpha_bar}, {self.beta_bar}) is outside the ZDS strip "
                f"for R={params.R}, P={params.P}"
            )
        return self


VERTEX = ZdsPoint(-1.0, -1.0)


def switch(x) -> np.ndarray:
    """Swap entries 2 and 3 (the ``cd``/``dc`` relabelling between players)."""
    x = np.asarray(x, dtype=float)
    return x[..., [0, 2, 1, 3]]


def x_press_dyson(p) -> np.ndarray:
    """X Press-Dyson vector ``p - e12``."""
    return _as_array(p) - E12


def y_press_dyson(q) -> np.ndarray:
    """Y Press-Dyson vector ``Switch(q) - e13``."""
    return switch(_as_array(q)) - E13


def basis_matrix(params: PayoffParams) -> np.ndarray:
    """Columns ``S_X, S_Y, 1, e23`` for the given payoffs."""
    return np.column_stack([params.s_x, params.s_y, np.ones(4), E23])


def _normalized_rp(params) -> tuple[np.ndarray, np.ndarray]:
    T, R, P, S = payoff_arrays(params)
    if np.any(T != 1.0) or np.any(S != 0.0):
        raise ConstraintViolation("Press-Dyson coordinates need normalized payoffs")
    return R, P


def inverse_basis(params) -> np.ndarray:
    """Closed-form inverse of :func:`basis_matrix` for normalized payoffs.

    ``params`` may also be an array of normalized ``(T, R, P, S)`` rows, giving
    a stack of inverses of shape ``(..., 4, 4)``.
    """
    R, P = _normalized_rp(params)
    d = R - P
    one, zero = np.ones_like(d), np.zeros_like(d)
    inv = np.stack(
        [
            np.stack([-one, d, -d, one], axis=-1),
            np.stack([-one, -d, d, one], axis=-1),
            np.stack([2 * P, zero, zero, -2 * R], axis=-1),
            np.stack([1 - 2 * P, -d, -d, 2 * R - 1], axis=-1),
        ],
        axis=-2,
    )
    return inv * (-1.0 / (2 * d))[..., None, None]


def decompose(p_tilde, params) -> PressDysonCoords:
    """Coordinates of ``p_tilde`` (shape ``(4,)`` or ``(..., 4)``)."""
    pt = np.asarray(p_tilde, dtype=float)
    inv = inverse_basis(params)
    c = np.einsum("...ij,...j->...i", inv, pt)
    if c.ndim == 1:
        return PressDysonCoords(*map(float, c))
    return PressDysonCoords(c[..., 0], c[..., 1], c[..., 2], c[..., 3])


def recompose(c: PressDysonCoords, params: PayoffParams) -> np.ndarray:
    _require_normalized(params)
    a, b, g, d = (np.asarray(x, dtype=float)[..., None] for x in c)
    return a * params.s_x + b * params.s_y + g + d * E23


def check_constraints(c: PressDysonCoords, params: PayoffParams, tol: float = SIGN_TOL) -> ConstraintReport:
    """Sign constraints, size constraints and the implied coordinate facts.

    The sign constraints say the first two entries of ``p_tilde`` are
    nonpositive and the last two nonnegative; the size constraints bound every
    entry by 1 in absolute value.
    """
    _require_normalized(params)
    a, b, g, d = (float(x) for x in c)
    R, P = params.R, params.P
    sign_ok = (
        (a + b) * R + g <= tol
        and b + g + d <= tol
        and a + g + d >= -tol
        and (a + b) * P + g >= -tol
    )
    pt = recompose(c, params)
    size_ok = bool(np.all(np.abs(pt) <= 1.0 + tol))
    ab_zero = abs(a + b) <= tol
    g_zero = abs(g) <= tol
    structure_ok = a + b <= tol and g >= -tol and ab_zero == g_zero
    return ConstraintReport(bool(sign_ok), size_ok, bool(structure_ok))


def top_strategy(p) -> tuple[StrategyVector, float]:
    """Split ``p`` as ``a * top + (1 - a) * Repeat`` with ``max |top_tilde| = 1``."""
    pt = x_press_dyson(p)
    a = float(np.max(np.abs(pt)))
    if a == 0.0:
        raise ConstraintViolation("Repeat has a zero Press-Dyson vector and no top form")
    init = p.init_coop if isinstance(p, StrategyVector) else 1.0
    return StrategyVector(tuple(pt / a + E12), init), a


def bar_coords(c: PressDysonCoords, params: PayoffParams | None = None, tol: float = SIGN_TOL) -> BarCoords:
    """Divide by ``gamma``; with ``params`` also check the bar-coordinate constraints."""
    a, b, g, d = (float(x) for x in c)
    if g <= tol:
        raise ConstraintViolation(
            "gamma = 0: exceptional strategy (agreeable and firm) has no bar coordinates"
        )
    ab, bb, db = a / g, b / g, d / g
    s = ab + bb
    Z = -1.0 / s if s != 0.0 else np.inf
    if params is not None:
        _require_normalized(params)
        R, P = params.R, params.P
        ok = (
            -1.0 / P - tol <= s <= -1.0 / R + tol
            and bb <= -1.0 - db + tol
            and -1.0 - db <= ab + tol
        )
        if not ok:
            raise ConstraintViolation(
                f"bar coordinates ({ab}, {bb}, {db}) violate the strategy-strip constraints"
            )
    return BarCoords(ab, bb, db, Z)


def complier_top(alpha_bar: float, params: PayoffParams, init_coop: float = 1.0) -> StrategyVector:
    """Agreeable ZDS top strategy on the ``Z = R`` line with ``alpha_bar > 0``."""
    _require_normalized(params)
    if not alpha_bar > 0:
        raise ConstraintViolation("complier strategies need alpha_bar > 0")
    R, P = params.R, params.P
    k = R * (alpha_bar + 1.0)
    return StrategyVector((1.0, (2 * R - 1) / k, 1.0, (R - P) / k), init_coop)


def zds_delta(p_tilde, params) -> float:
    """``delta`` coordinate alone; zero exactly for zero-determinant strategies."""
    R, P = _normalized_rp(params)
    pt = np.asarray(p_tilde, dtype=float)
    num = (2 * P - 1) * pt[..., 0] + (R - P) * (pt[..., 1] + pt[..., 2]) - (2 * R - 1) * pt[..., 3]
    return num / (2 * (R - P))


def zds_top(point: ZdsPoint, params: PayoffParams, scale: float = 1.0,
            init_coop: float = 1.0) -> StrategyVector:
    """Strategy with ``p_tilde = gamma (alpha_bar S_X + beta_bar S_Y + 1)``.

    ``scale = 1`` gives the top strategy; smaller values mix it with Repeat.
    Entries within ``SNAP_TOL`` of 0 or 1 are set exactly.
    The same vector serves for either player, since switching roles swaps
    ``S_X`` and ``S_Y``.
    """
    point.check_strip(params)
    if not 0.0 < scale <= 1.0:
        raise ConstraintViolation("scale must lie in (0, 1]")
    v = point.alpha_bar * params.s_x + point.beta_bar * params.s_y + 1.0
    gamma = scale / np.max(np.abs(v))
    p = gamma * v + E12
    # structural zeros and ones come out with rounding noise
    p[np.abs(p) <= SNAP_TOL] = 0.0
    p[np.abs(p - 1.0) <= SNAP_TOL] = 1.0
    return StrategyVector(tuple(p), init_coop)


def edge(params: PayoffParams) -> StrategyVector:
    """Boundary point ``(1, (2R - 1)/R, 1, 0)`` between good and not good on TFT-Lame."""
    R = params.R if params.normalized else (params.R - params.S) / (params.T - params.S)
    return StrategyVector((1.0, (2 * R - 1) / R, 1.0, 0.0))


def complier_point(alpha_bar: float, params: PayoffParams) -> ZdsPoint:
    return ZdsPoint(alpha_bar, -1.0 / params.R - alpha_bar)


def extortion_point(alpha_bar: float, params: PayoffParams) -> ZdsPoint:
    return ZdsPoint(alpha_bar, -1.0 / params.P - alpha_bar)


def equalizer_point(Z: float) -> ZdsPoint:
    return ZdsPoint(0.0, -1.0 / Z)
