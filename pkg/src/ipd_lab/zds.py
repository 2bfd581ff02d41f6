"""Closed-form payoffs when one or both players use zero-determinant strategies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import PayoffParams, build_markov, expected_payoffs, initial_distribution
from .markov import limit_distribution
from .pressdyson import VERTEX_TOL, ZdsPoint, zds_top

__all__ = [
    "ORDER_TOL",
    "kappa",
    "kappa_residual",
    "value_line_residual",
    "DuelResult",
    "duel_payoffs",
    "markov_duel",
    "OrderingReport",
    "ordering_report",
]

ORDER_TOL = 1e-12


def kappa(point: ZdsPoint, params: PayoffParams | None = None) -> float:
    """``kappa = alpha_bar Z / (1 + alpha_bar Z)``.

    Against any opponent, the ZDS player's payoff ``s`` and the opponent's
    payoff ``t`` satisfy ``kappa (s - Z) = t - Z``.
    """
    if params is not None:
        point.check_strip(params)
    az = point.alpha_bar * point.Z
    denom = 1.0 + az
    # in the strip 1 + alpha_bar Z = -beta_bar Z >= Z > 0
    assert denom > 0.0, "1 + alpha_bar Z must be positive inside the strip"
    return az / denom


def kappa_residual(point: ZdsPoint, s_zds: float, s_opp: float) -> float:
    """``kappa (s_zds - Z) - (s_opp - Z)``; zero up to rounding for any opponent."""
    Z = point.Z
    return kappa(point) * (s_zds - Z) - (s_opp - Z)


def value_line_residual(point: ZdsPoint, s_zds: float, s_opp: float) -> float:
    """``alpha_bar Z (s_zds - s_opp) - (s_opp - Z)``, the same relation without division."""
    Z = point.Z
    return point.alpha_bar * Z * (s_zds - s_opp) - (s_opp - Z)


@dataclass
class DuelResult:
    s_x: float
    s_y: float
    z_x: float
    z_y: float
    D: float
    ordering: "OrderingReport | None" = None
    markov: tuple[float, float] | None = None
    v: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {"s_x": self.s_x, "s_y": self.s_y, "Z_x": self.z_x, "Z_y": self.z_y, "D": self.D}
        if self.ordering is not None:
            out["ordering"] = self.ordering.to_dict()
        if self.markov is not None:
            out["markov"] = {"s_x": self.markov[0], "s_y": self.markov[1], "v": self.v.tolist()}
        return out


def _solve(x: ZdsPoint, y: ZdsPoint) -> tuple[float, float, float]:
    if x.is_vertex() and y.is_vertex():
        return 0.5, 0.5, 0.0
    D = y.beta_bar * x.beta_bar - x.alpha_bar * y.alpha_bar
    return (y.alpha_bar - x.beta_bar) / D, (x.alpha_bar - y.beta_bar) / D, D


def markov_duel(x: ZdsPoint, y: ZdsPoint, params: PayoffParams, init_x: float = 1.0,
                init_y: float = 1.0, scale_x: float = 1.0, scale_y: float = 1.0):
    """Payoffs of the recomposed strategies from the Markov chain; returns ``(s_x, s_y, v)``."""
    p = zds_top(x, params, scale_x, init_x)
    q = zds_top(y, params, scale_y, init_y)
    M = build_markov(p, q)
    v = limit_distribution(M, initial_distribution(init_x, init_y))
    s_x, s_y = expected_payoffs(v, params)
    return s_x, s_y, v


def duel_payoffs(x: ZdsPoint, y: ZdsPoint, params: PayoffParams | None = None,
                 audit: bool = False, init_x: float = 1.0, init_y: float = 1.0) -> DuelResult:
    """Solve the two simultaneous Press-Dyson equations.

    ``alpha_bar s_X + beta_bar s_Y = -1`` and ``b_bar s_X + a_bar s_Y = -1``,
    with ``D = beta_bar b_bar - alpha_bar a_bar``. Two Vertex players get
    ``(1/2, 1/2)`` from the single remaining equation and symmetry.

    With ``params`` both points are checked against the strip. ``audit=True``
    also plays the top strategies through the Markov chain.
    """
    if params is not None:
        x.check_strip(params)
        y.check_strip(params)
    s_x, s_y, D = _solve(x, y)
    res = DuelResult(float(s_x), float(s_y), x.Z, y.Z, float(D))
    if audit:
        if params is None:
            raise ValueError("a Markov audit needs payoff parameters")
        mx, my, v = markov_duel(x, y, params, init_x, init_y)
        res.markov = (mx, my)
        res.v = v
    res.ordering = ordering_report(x, y, res)
    return res


@dataclass
class OrderingReport:
    """Chains of inequalities between ``Z_X, Z_Y, s_X, s_Y``.

    Each chain is a list alternating names and relations, e.g.
    ``["Z_X", ">", "s_Y", ">", "s_X"]``. ``holds`` says whether every relation
    was confirmed numerically.
    """

    chains: list[list[str]]
    values: dict[str, float]
    holds: bool

    def text(self) -> list[str]:
        return [" ".join(c) for c in self.chains]

    def to_dict(self) -> dict:
        return {"chains": self.text(), "holds": self.holds}


def _sign(v: float, tol: float) -> int:
    return 0 if abs(v) <= tol else (1 if v > 0 else -1)


def _check(chain: list[str], values: dict[str, float], tol: float) -> bool:
    ok = True
    for i in range(1, len(chain), 2):
        a, b = values[chain[i - 1]], values[chain[i + 1]]
        if chain[i] == ">":
            ok &= a > b + tol
        else:
            ok &= abs(a - b) <= tol
    return bool(ok)


def ordering_report(x: ZdsPoint, y: ZdsPoint, duel: DuelResult | None = None,
                    tol: float = ORDER_TOL) -> OrderingReport:
    """Inequality chains implied by the signs of ``alpha_bar`` and ``a_bar``.

    The player with the higher value line plays the role of X in the
    implications; labels are swapped back so names always refer to the
    actual players.
    """
    if duel is None:
        s_x, s_y, _ = _solve(x, y)
    else:
        s_x, s_y = duel.s_x, duel.s_y
    values = {"Z_X": x.Z, "Z_Y": y.Z, "s_X": s_x, "s_Y": s_y}
    if abs(x.Z - y.Z) <= tol:
        chain = ["s_X", "=", "s_Y", "=", "Z_X", "=", "Z_Y"]
        return OrderingReport([chain], values, _check(chain, values, tol))
    if x.Z > y.Z:
        hi, lo, H, L = x, y, "X", "Y"
    else:
        hi, lo, H, L = y, x, "Y", "X"
    zh, zl, sh, sl = f"Z_{H}", f"Z_{L}", f"s_{H}", f"s_{L}"
    first = {
        1: [zh, ">", sl, ">", sh],
        0: [zh, "=", sl, ">", sh],
        -1: [sl, ">", zh, ">", sh],
    }[_sign(hi.alpha_bar, VERTEX_TOL)]
    second = {
        1: [sl, ">", sh, ">", zl],
        0: [sl, ">", sh, "=", zl],
        -1: [sl, ">", zl, ">", sh],
    }[_sign(lo.alpha_bar, VERTEX_TOL)]
    chains = [first, second]
    return OrderingReport(chains, values, all(_check(c, values, tol) for c in chains))
