"""Strategy predicates: good, Nash type, strictly firm and the ZDS families.

Every predicate is available in two forms. :func:`classify` works from the
strategy vector and raw payoffs (probability inequalities). :func:`classify_coords`
works from Press-Dyson coordinates in the normalized basis. The two must agree,
which the test-suite checks on large random samples.

Margins are reported on the same scale in both forms (units of probability),
so one tolerance convention applies to both: a margin above ``tol`` is
strict, within ``[-tol, tol]`` counts as equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .game import (ConstraintViolation, PayoffParams, StrategyVector, build_markov,
                   expected_payoffs, initial_distribution, normalize, payoff_arrays)
from .markov import TerminalSetAnalysis, limit_distribution, terminal_sets
from .pressdyson import PressDysonCoords, decompose, zds_delta

__all__ = [
    "MARGIN_TOL",
    "FLAGS",
    "ClassificationReport",
    "strategy_flags",
    "coords_flags",
    "classify",
    "classify_coords",
    "classify_both",
    "ProbeResult",
    "ExploitReport",
    "PROBES",
    "exploit_probe",
    "PairConvergence",
    "pair_convergence",
]

MARGIN_TOL = 1e-9
# structural equalities (p1 = 1, delta = 0, ...) tolerate rounding in coordinates
STRUCT_TOL = 1e-12

FLAGS = (
    "agreeable",
    "firm",
    "generous",
    "exceptional",
    "is_repeat",
    "nash_type",
    "good",
    "strictly_firm",
    "zds",
    "equalizer",
    "complier",
    "extortion",
    "vertex",
)
MARGINS = ("nash_m1", "nash_m2", "firm_m1", "firm_m2", "delta")


def _normalized_rows(params) -> np.ndarray:
    T, R, P, S = payoff_arrays(params)
    span = T - S
    Rn, Pn = (R - S) / span, (P - S) / span
    return np.stack(np.broadcast_arrays(np.ones_like(Rn), Rn, Pn, np.zeros_like(Rn)), axis=-1)


def strategy_flags(p, params, tol: float = MARGIN_TOL) -> dict[str, np.ndarray]:
    """All predicates from strategy vectors ``p`` of shape ``(..., 4)``.

    ``params`` is a :class:`PayoffParams` or an array of raw ``(T, R, P, S)``
    rows broadcasting against ``p``.
    """
    p = np.asarray(p, dtype=float)
    T, R, P, S = payoff_arrays(params)
    p1, p2, p3, p4 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    agreeable = p1 == 1.0
    firm = p4 == 0.0
    repeat = agreeable & (p2 == 1.0) & (p3 == 0.0) & firm

    nash_m1 = (1 - p2) - (T - R) / (R - S) * p3
    nash_m2 = (1 - p2) - (T - R) / (R - P) * p4
    firm_m1 = (P - S) / (R - P) * (1 - p1) - p3
    firm_m2 = (P - S) / (T - P) * (1 - p2) - p3

    nash = agreeable & ~repeat & (p2 < 1.0) & (nash_m1 >= -tol) & (nash_m2 >= -tol)
    good = nash & (nash_m1 > tol) & (nash_m2 > tol)
    strictly_firm = firm & (firm_m1 > tol) & (firm_m2 > tol)

    pt = p - np.array([1.0, 1.0, 0.0, 0.0])
    delta = zds_delta(pt, _normalized_rows(params))
    zds = (np.abs(delta) <= STRUCT_TOL) & ~repeat

    # equalizer: p_tilde in span{S_Y, 1}, read off from entries 2 and 3
    b = (pt[..., 1] - pt[..., 2]) / (T - S)
    g = pt[..., 2] - b * S
    equalizer = (
        ~repeat
        & (np.abs(pt[..., 0] - (b * R + g)) <= STRUCT_TOL)
        & (np.abs(pt[..., 3] - (b * P + g)) <= STRUCT_TOL)
    )
    vertex = zds & (p2 == 1.0) & (p3 == 0.0) & (T + S >= 2 * P)
    return {
        "agreeable": agreeable,
        "firm": firm,
        "generous": (p2 > 0.0) & (p4 > 0.0),
        "exceptional": agreeable & firm,
        "is_repeat": repeat,
        "nash_type": nash,
        "good": good,
        "strictly_firm": strictly_firm,
        "zds": zds,
        "equalizer": equalizer,
        # agreeable ZDS off the exceptional square is good iff alpha > 0
        "complier": zds & agreeable & ~firm & good,
        # firm ZDS off the square has alpha > 0 iff the first firm margin is negative
        "extortion": zds & firm & ~agreeable & (firm_m1 < -tol),
        "vertex": vertex,
        "nash_m1": nash_m1,
        "nash_m2": nash_m2,
        "firm_m1": firm_m1,
        "firm_m2": firm_m2,
        "delta": delta,
    }


def coords_flags(c: PressDysonCoords, params, tol: float = MARGIN_TOL) -> dict[str, np.ndarray]:
    """All predicates from normalized Press-Dyson coordinates.

    ``params`` may be raw (a :class:`PayoffParams` or ``(T, R, P, S)`` rows);
    it is normalized here and ``c`` must be coordinates with respect to the
    normalized basis.
    """
    rows = _normalized_rows(params)
    R, P = rows[..., 1], rows[..., 2]
    a, b, g, d = (np.asarray(x, dtype=float) for x in c)
    ab = a + b
    agreeable = np.abs(ab * R + g) <= STRUCT_TOL
    firm = np.abs(ab * P + g) <= STRUCT_TOL
    repeat = (np.abs(a) <= STRUCT_TOL) & (np.abs(b) <= STRUCT_TOL) & (
        np.abs(g) <= STRUCT_TOL) & (np.abs(d) <= STRUCT_TOL)
    one_minus_p2 = -(b + g + d)
    p4 = ab * P + g

    nash_m1 = ((2 * R - 1) * a - d) / R
    nash_m2 = a - d
    firm_m1 = -a - d
    firm_m2 = (-d - (1 - 2 * P) * a) / (1 - P)

    nash = agreeable & ~repeat & (one_minus_p2 > STRUCT_TOL) & (nash_m1 >= -tol) & (nash_m2 >= -tol)
    good = nash & (nash_m1 > tol) & (nash_m2 > tol)
    strictly_firm = firm & (firm_m1 > tol) & (firm_m2 > tol)
    zds = (np.abs(d) <= STRUCT_TOL) & ~repeat
    nonexc = g > STRUCT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        a_bar = np.where(nonexc, a / np.where(nonexc, g, 1.0), np.nan)
        b_bar = np.where(nonexc, b / np.where(nonexc, g, 1.0), np.nan)
    vertex = (
        zds
        & nonexc
        & (np.abs(a_bar + 1.0) <= STRUCT_TOL)
        & (np.abs(b_bar + 1.0) <= STRUCT_TOL)
        & (P <= 0.5)
    )
    return {
        "agreeable": agreeable,
        "firm": firm,
        "generous": (1.0 - one_minus_p2 > STRUCT_TOL) & (p4 > STRUCT_TOL),
        "exceptional": agreeable & firm,
        "is_repeat": repeat,
        "nash_type": nash,
        "good": good,
        "strictly_firm": strictly_firm,
        "zds": zds,
        "equalizer": zds & (np.abs(a) <= STRUCT_TOL),
        "complier": zds & agreeable & nonexc & good,
        "extortion": zds & firm & nonexc & (firm_m1 < -tol),
        "vertex": vertex,
        "nash_m1": nash_m1,
        "nash_m2": nash_m2,
        "firm_m1": firm_m1,
        "firm_m2": firm_m2,
        "delta": d,
    }


@dataclass
class ClassificationReport:
    agreeable: bool
    firm: bool
    generous: bool
    exceptional: bool
    is_repeat: bool
    nash_type: bool
    good: bool
    strictly_firm: bool
    zds: bool
    equalizer: bool
    complier: bool
    extortion: bool
    vertex: bool
    margins: dict[str, float | None] = field(default_factory=dict)
    form: str = "strategy"
    witnesses: "ExploitReport | None" = None

    def flags(self) -> dict[str, bool]:
        return {k: getattr(self, k) for k in FLAGS}

    def to_dict(self) -> dict:
        out: dict = {"form": self.form, **self.flags(), "margins": dict(self.margins)}
        if self.witnesses is not None:
            out["witnesses"] = self.witnesses.to_dict()
        return out


def _report(raw: dict, form: str) -> ClassificationReport:
    flags = {k: bool(raw[k]) for k in FLAGS}
    margins = {k: float(raw[k]) for k in MARGINS}
    # the inequalities only characterize agreeable (resp. firm) strategies
    if not flags["agreeable"]:
        margins["nash_m1"] = margins["nash_m2"] = None
    if not flags["firm"]:
        margins["firm_m1"] = margins["firm_m2"] = None
    return ClassificationReport(**flags, margins=margins, form=form)


def classify(p, params: PayoffParams, tol: float = MARGIN_TOL) -> ClassificationReport:
    """Classify one strategy from its probability vector.

    Nash type and good follow the two payoff-ratio inequalities on ``p2, p3,
    p4`` for agreeable strategies; Repeat and agreeable strategies with
    ``p2 = 1`` are never Nash type.
    """
    arr = p.array if isinstance(p, StrategyVector) else np.asarray(p, dtype=float)
    return _report(strategy_flags(arr, params, tol), "strategy")


def classify_coords(c: PressDysonCoords, params: PayoffParams, tol: float = MARGIN_TOL) -> ClassificationReport:
    """Classify one strategy from its normalized Press-Dyson coordinates."""
    return _report(coords_flags(c, params, tol), "coords")


def classify_both(p, params: PayoffParams, tol: float = MARGIN_TOL) -> tuple[ClassificationReport, ClassificationReport]:
    """Both forms for one strategy; convenience for reports and the CLI."""
    arr = p.array if isinstance(p, StrategyVector) else np.asarray(p, dtype=float)
    c = decompose(arr - np.array([1.0, 1.0, 0.0, 0.0]), normalize(params))
    return classify(arr, params, tol), classify_coords(c, params, tol)


# ---------------------------------------------------------------------------
# exploitation probes


PROBES = {
    "alld": StrategyVector((0.0, 0.0, 0.0, 0.0), init_coop=0.0),
    "0111": StrategyVector((0.0, 1.0, 1.0, 1.0), init_coop=0.0),
}


class ProbeResult(NamedTuple):
    name: str
    q: tuple[float, float, float, float]
    v: np.ndarray
    s_x: float
    s_y: float


@dataclass
class ExploitReport:
    results: list[ProbeResult]
    good_witness: str | None
    nash_witness: str | None
    certified_good: bool

    def to_dict(self) -> dict:
        return {
            "probes": [
                {"name": r.name, "q": list(r.q), "v": r.v.tolist(), "s_x": r.s_x, "s_y": r.s_y}
                for r in self.results
            ],
            "good_witness": self.good_witness,
            "nash_witness": self.nash_witness,
            "certified_good": self.certified_good,
        }


def exploit_probe(p: StrategyVector, params: PayoffParams, tol: float = MARGIN_TOL) -> ExploitReport:
    """Play the two defecting probes against an agreeable ``p`` with ``p2 < 1``.

    If ``p`` is not good, one probe gets ``s_Y >= R`` while holding X below
    ``R``; if ``p`` is not Nash type, one probe gets ``s_Y > R``. For a good
    ``p`` both probes stay strictly below ``R``.
    """
    if not isinstance(p, StrategyVector):
        p = StrategyVector(tuple(p))
    if not p.agreeable or not p.p[1] < 1.0:
        raise ConstraintViolation("exploit probe needs an agreeable strategy with p2 < 1")
    R = params.R
    results = []
    for name, q in PROBES.items():
        M = build_markov(p, q)
        v = limit_distribution(M, initial_distribution(p.init_coop, q.init_coop))
        s_x, s_y = expected_payoffs(v, params)
        results.append(ProbeResult(name, q.p, v, s_x, s_y))
    scale = params.T - params.S
    good_w = next((r.name for r in results if r.s_y >= R - tol * scale and r.s_x < R - tol * scale), None)
    nash_w = next((r.name for r in results if r.s_y > R + tol * scale and r.s_x < R), None)
    certified = all(r.s_y < R - tol * scale for r in results)
    return ExploitReport(results, good_w, nash_w, certified)


class PairConvergence(NamedTuple):
    cc_unique: bool
    hypotheses_met: bool
    analysis: TerminalSetAnalysis


def pair_convergence(p: StrategyVector, q: StrategyVector, params: PayoffParams) -> PairConvergence:
    """Check whether ``{cc}`` is the unique terminal set for the pair.

    The guarantee holds when ``p`` is generous and Nash type and ``q`` is Nash
    type and either generous or has ``q3 + q4 > 0``; ``hypotheses_met``
    records whether that is the case. The answer itself always comes from
    the computed terminal sets.
    """
    cp = classify(p, params)
    cq = classify(q, params)
    hyp = cp.generous and cp.nash_type and cq.nash_type and (cq.generous or q.p[2] + q.p[3] > 0)
    analysis = terminal_sets(build_markov(p, q))
    return PairConvergence(analysis.terminal_sets == ((0,),), bool(hyp), analysis)
