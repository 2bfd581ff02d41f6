"""Command-line interface: ``ipd-lab classify|duel|matrix|evolve|zds|probe``.

Rosters are JSON files::

    {"payoffs": {"T": 5, "R": 3, "P": 1, "S": 0},
     "strategies": [{"name": "tft", "p": "tft"},
                    {"name": "c1", "p": "complier:1", "init_coop": 1},
                    {"name": "x", "p": [1, 0.5, 0.5, 0]},
                    {"name": "z", "zds_point": [-0.5, -1.1666666666666667]}]}

All analysis runs in normalized payoff units (``T = 1``, ``S = 0``); ZDS
points are read in those units as well. Results go to stdout as JSON (one
object per line) or to CSV files; errors go to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .classify import classify_both, exploit_probe, pair_convergence
from .game import (ConstraintViolation, OUTCOMES, PayoffParams, StrategyVector, build_markov,
                   expected_payoffs, initial_distribution, normalize)
from .markov import (NotConvergentToCC, NumericFailure, absorption_probabilities,
                     cesaro_rollout, hitting_times, limit_distribution, press_dyson_residual,
                     terminal_sets)
from .pressdyson import (ALLC, ALLD, GRIM, LAME, PAVLOV, REPEAT, TFT, ZdsPoint, complier_point,
                         decompose, edge, equalizer_point, extortion_point, x_press_dyson,
                         y_press_dyson, zds_top)
from .replicator import (NoInteriorEquilibrium, Roster, RosterEntry, detect_ess_eus,
                         domination_analysis, integrate, interior_equilibrium_2, payoff_matrix,
                         zero_sum_dynamics)
from .zds import duel_payoffs, kappa

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

ROSTER_SCHEMA = {
    "type": "object",
    "required": ["payoffs", "strategies"],
    "additionalProperties": False,
    "properties": {
        "payoffs": {
            "type": "object",
            "required": ["T", "R", "P", "S"],
            "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in "TRPS"},
        },
        "strategies": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "p": {
                        "oneOf": [
                            {"type": "string"},
                            {
                                "type": "array",
                                "items": {"type": "number", "minimum": 0, "maximum": 1},
                                "minItems": 4,
                                "maxItems": 4,
                            },
                        ]
                    },
                    "init_coop": {"type": "number", "minimum": 0, "maximum": 1},
                    "zds_point": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "anyOf": [{"required": ["p"]}, {"required": ["zds_point"]}],
            },
        },
    },
}

FIXED = {
    "tft": TFT,
    "repeat": REPEAT,
    "grim": GRIM,
    "lame": LAME,
    "pavlov": PAVLOV,
    "allc": ALLC,
    "alld": ALLD,
}


class InputError(ValueError):
    """Bad command-line arguments or roster contents."""


# ---------------------------------------------------------------------------
# output


def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj) -> str:
    """Compact deterministic JSON with floats written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# roster loading


def builtin_strategy(spec: str, params: PayoffParams) -> tuple[StrategyVector, ZdsPoint | None]:
    """Expand a built-in name such as ``tft`` or ``complier:1`` (normalized params)."""
    key, _, arg = spec.strip().lower().partition(":")
    if key in FIXED and not arg:
        return FIXED[key], None
    if key == "edge" and not arg:
        return edge(params), None
    makers = {
        "complier": complier_point,
        "extortion": extortion_point,
        "equalizer": lambda z, _p: equalizer_point(z),
    }
    if key in makers and arg:
        try:
            val = float(arg)
        except ValueError:
            raise InputError(f"bad parameter in built-in strategy {spec!r}") from None
        if key == "complier" and not val > 0:
            raise ConstraintViolation("complier strategies need alpha_bar > 0")
        if key == "extortion" and not val > 0:
            raise ConstraintViolation("extortion strategies need alpha_bar > 0")
        pt = makers[key](val, params).check_strip(params)
        return zds_top(pt, params), pt
    raise InputError(f"unknown built-in strategy {spec!r}")


def load_roster(path) -> tuple[Roster, PayoffParams, PayoffParams]:
    """Read and validate a roster file; returns ``(roster, raw, normalized)``."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read roster {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"roster {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    return roster_from_doc(doc)


def roster_from_doc(doc) -> tuple[Roster, PayoffParams, PayoffParams]:
    try:
        jsonschema.validate(doc, ROSTER_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"roster schema violation at {where}: {exc.message}") from None
    pay = doc["payoffs"]
    raw = PayoffParams(pay["T"], pay["R"], pay["P"], pay["S"])
    norm = normalize(raw)
    entries = []
    for item in doc["strategies"]:
        pt = None
        if "zds_point" in item:
            pt = ZdsPoint(*map(float, item["zds_point"])).check_strip(norm)
        p = item.get("p")
        if isinstance(p, str):
            strat, tag = builtin_strategy(p, norm)
            pt = pt or tag
        elif p is not None:
            strat = StrategyVector(tuple(p))
        else:
            strat = zds_top(pt, norm)
        if "init_coop" in item:
            strat = strat.with_init(item["init_coop"])
        entries.append(RosterEntry(item["name"], strat, pt))
    return Roster(entries), raw, norm


def _parse_floats(text: str, n: int | None, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"{what} needs {n} numbers, got {len(vals)}")
    return vals


def _entry(roster: Roster, name: str) -> RosterEntry:
    try:
        return roster[roster.index(name)]
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None


# ---------------------------------------------------------------------------
# matrix CSV


def write_matrix_csv(fh, pm) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["row", "col", "payoff", "init_dependent"])
    for i, a in enumerate(pm.names):
        for j, b in enumerate(pm.names):
            w.writerow([a, b, _num(pm.A[i, j]), int(bool(pm.init_dependent[i, j]))])


def read_matrix_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Inverse of the ``matrix`` command's CSV output."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    names: list[str] = []
    for r in rows:
        if r["row"] not in names:
            names.append(r["row"])
    idx = {n: k for k, n in enumerate(names)}
    A = np.full((len(names), len(names)), np.nan)
    dep = np.zeros_like(A, dtype=bool)
    for r in rows:
        i, j = idx[r["row"]], idx[r["col"]]
        A[i, j] = float(r["payoff"])
        dep[i, j] = r["init_dependent"] == "1"
    return names, A, dep


# ---------------------------------------------------------------------------
# commands


def _coords_dict(p, norm) -> dict:
    c = decompose(x_press_dyson(p), norm)
    return dict(zip(("alpha", "beta", "gamma", "delta"), c))


def cmd_classify(args, out) -> int:
    roster, raw, norm = load_roster(args.roster)
    entries = [_entry(roster, args.strategy)] if args.strategy else list(roster)
    for e in entries:
        a, b = classify_both(e.strategy, norm)
        rec = {
            "name": e.name,
            "p": list(e.strategy.p),
            "init_coop": e.strategy.init_coop,
            "coords": _coords_dict(e.strategy, norm),
            "strategy_form": a.to_dict(),
            "coords_form": b.to_dict(),
            "forms_agree": a.flags() == b.flags(),
        }
        out.write(dumps(rec) + "\n")
    return EXIT_OK


def cmd_duel(args, out) -> int:
    roster, raw, norm = load_roster(args.roster)
    ex, ey = _entry(roster, args.x), _entry(roster, args.y)
    p, q = ex.strategy, ey.strategy
    if args.init_x is not None:
        p = p.with_init(args.init_x)
    if args.init_y is not None:
        q = q.with_init(args.init_y)
    M = build_markov(p, q)
    analysis = terminal_sets(M)
    v1 = initial_distribution(p.init_coop, q.init_coop)
    absorb = absorption_probabilities(M, v1, analysis)
    v = limit_distribution(M, v1, analysis)
    s_x, s_y = expected_payoffs(v, norm)
    r_x, r_y = expected_payoffs(v, raw)
    try:
        ht = dict(zip(("cd", "dc", "dd"), hitting_times(M).as_tuple()))
    except NotConvergentToCC:
        ht = None
    rec = {
        "x": ex.name,
        "y": ey.name,
        "p": list(p.p),
        "q": list(q.p),
        "init": [p.init_coop, q.init_coop],
        "terminal_sets": analysis.names(),
        "transient": [OUTCOMES[i] for i in analysis.transient_states],
        "stationary": [s.tolist() for s in analysis.stationary],
        "absorption": absorb.tolist(),
        "v": v.tolist(),
        "s_x": s_x,
        "s_y": s_y,
        "s_x_raw": r_x,
        "s_y_raw": r_y,
        "hitting_times": ht,
        "press_dyson_residual": {
            "x": press_dyson_residual(v, x_press_dyson(p)),
            "y": press_dyson_residual(v, y_press_dyson(q)),
        },
        "cc_convergence": pair_convergence(p, q, norm)[:2],
    }
    if args.rollout:
        avgs = cesaro_rollout(p, q, v1, args.rollout, mode=args.rollout_mode, seed=args.seed)
        rec["rollout"] = {
            "mode": args.rollout_mode,
            "n": args.rollout,
            "seed": args.seed,
            "average": avgs[-1].tolist(),
            "l1_to_limit": float(np.abs(avgs[-1] - v).sum()),
        }
    if ex.zds_point is not None and ey.zds_point is not None:
        rec["zds_duel"] = duel_payoffs(ex.zds_point, ey.zds_point, norm).to_dict()
    out.write(dumps(rec) + "\n")
    return EXIT_OK


def cmd_matrix(args, out) -> int:
    roster, raw, norm = load_roster(args.roster)
    pm = payoff_matrix(roster, norm, method=args.method)
    if args.output and args.output != "-":
        with open(args.output, "w", newline="") as fh:
            write_matrix_csv(fh, pm)
    else:
        write_matrix_csv(out, pm)
    return EXIT_OK


def _evolve_report(roster, pm, traj, setup, mode) -> dict:
    A = pm.A
    n = A.shape[0]
    G = A - A.T if mode == "zerosum" else A
    strategies = {}
    for i, name in enumerate(roster.names):
        ess = detect_ess_eus(G, i)
        dom = domination_analysis(G, i)
        strategies[name] = {
            "kind": ess.kind,
            "margins": [None if math.isnan(m) else float(m) for m in ess.margins],
            "dominates": None if dom is None else [
                {"strategy": roster.names[s.j], "m": s.m, "M": s.M, "eps": s.eps} for s in dom
            ],
        }
    tail = traj.tail()
    rep = {
        "mode": mode,
        "names": roster.names,
        "final": traj.final.tolist(),
        "t_final": float(traj.t[-1]),
        "steps": traj.steps,
        "converged": traj.converged,
        "frozen": traj.frozen,
        "tail": {k: v.tolist() for k, v in tail.items()},
        "strategies": strategies,
        "init_dependent_cells": int(pm.init_dependent.sum()),
    }
    if n == 2:
        try:
            eq = interior_equilibrium_2(G)
            rep["equilibrium"] = {"w_star": eq.w_star, "stable": eq.stable, "slope": eq.slope}
        except NoInteriorEquilibrium as exc:
            rep["equilibrium"] = {"none": str(exc)}
    if setup is not None and traj.xi_pi is not None:
        rep["xi_max_increase"] = float(np.max(np.diff(traj.xi_pi))) if len(traj.xi_pi) > 1 else 0.0
    return rep


def cmd_evolve(args, out) -> int:
    roster, raw, norm = load_roster(args.roster)
    n = len(roster)
    if n < 2:
        raise InputError("evolve needs at least two strategies")
    if args.pi0:
        pi0 = np.array(_parse_floats(args.pi0, n, "--pi0"))
    else:
        pi0 = np.full(n, 1.0 / n)
    if np.any(pi0 < 0) or abs(pi0.sum() - 1.0) > 1e-9:
        raise InputError("--pi0 must be nonnegative and sum to 1")
    pi0 = pi0 / pi0.sum()
    setup = None
    if args.mode == "zerosum":
        setup = zero_sum_dynamics(roster, norm)
        pm = payoff_matrix(roster, norm, method="closed")
    else:
        pm = payoff_matrix(roster, norm)
        if roster.all_zds:
            setup = zero_sum_dynamics(roster, norm)
    xi = setup.xi if setup is not None else None
    traj = integrate(pi0, pm.A, dt=args.dt, t_max=args.t_max, mode=args.mode, xi=xi,
                     record_every=args.record_every)
    if args.output:
        header = ["t"] + [f"pi_{nm}" for nm in roster.names] + ["A_pipi"]
        if xi is not None:
            header.append("xi_pi")
        dest = open(args.output, "w", newline="") if args.output != "-" else None
        fh = dest if dest is not None else io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(len(traj.t)):
            row = [_num(traj.t[k])] + [_num(x) for x in traj.pi[k]] + [_num(traj.a_pp[k])]
            if xi is not None:
                row.append(_num(traj.xi_pi[k]))
            w.writerow(row)
        if dest is not None:
            dest.close()
        else:
            out.write(fh.getvalue())
    out.write(dumps(_evolve_report(roster, pm, traj, setup, args.mode)) + "\n")
    return EXIT_OK


def cmd_zds(args, out) -> int:
    if args.params:
        raw = PayoffParams(*_parse_floats(args.params, 4, "--params"))
    else:
        raw = PayoffParams(5.0, 3.0, 1.0, 0.0)
    norm = normalize(raw)
    pt = ZdsPoint(*_parse_floats(args.point, 2, "--point"))
    pt.check_strip(norm)
    top = zds_top(pt, norm, scale=args.scale, init_coop=args.init_coop)
    a, b = classify_both(top, norm)
    rec = {
        "point": list(pt),
        "params": list(norm.as_tuple()),
        "in_strip": True,
        "Z": pt.Z,
        "kappa": kappa(pt),
        "vertex": pt.is_vertex(),
        "strategy": list(top.p),
        "coords": _coords_dict(top, norm),
        "strategy_form": a.to_dict(),
        "coords_form": b.to_dict(),
    }
    out.write(dumps(rec) + "\n")
    return EXIT_OK


def cmd_probe(args, out) -> int:
    roster, raw, norm = load_roster(args.roster)
    e = _entry(roster, args.strategy)
    a, _ = classify_both(e.strategy, norm)
    rep = exploit_probe(e.strategy, norm)
    rec = {
        "name": e.name,
        "p": list(e.strategy.p),
        "good": a.good,
        "nash_type": a.nash_type,
        **rep.to_dict(),
    }
    out.write(dumps(rec) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ipd-lab", description="Memory-one iterated Prisoner's Dilemma analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify roster strategies")
    p.add_argument("roster")
    p.add_argument("--strategy", help="only this strategy")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("duel", help="long-run analysis of one pair")
    p.add_argument("roster")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--init-x", type=float, help="override X's first-round cooperation probability")
    p.add_argument("--init-y", type=float)
    p.add_argument("--rollout", type=int, default=0, help="also roll out N rounds")
    p.add_argument("--rollout-mode", choices=("exact", "montecarlo"), default="montecarlo")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_duel)

    p = sub.add_parser("matrix", help="payoff matrix as long-format CSV")
    p.add_argument("roster")
    p.add_argument("-o", "--output", help="CSV path ('-' or omitted: stdout)")
    p.add_argument("--method", choices=("markov", "closed"), default="markov")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("evolve", help="integrate replicator dynamics")
    p.add_argument("roster")
    p.add_argument("--pi0", help="comma-separated initial frequencies (default uniform)")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--t-max", type=float, default=500.0)
    p.add_argument("--mode", choices=("standard", "zerosum"), default="standard")
    p.add_argument("--record-every", type=int, default=100)
    p.add_argument("-o", "--output", help="trajectory CSV path")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("zds", help="inspect one ZDS strip point")
    p.add_argument("--point", required=True, help="alpha_bar,beta_bar")
    p.add_argument("--params", help="T,R,P,S (default 5,3,1,0)")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--init-coop", type=float, default=1.0)
    p.set_defaults(func=cmd_zds)

    p = sub.add_parser("probe", help="exploitation witnesses for an agreeable strategy")
    p.add_argument("roster")
    p.add_argument("--strategy", required=True)
    p.set_defaults(func=cmd_probe)
    return ap


def _error(kind: str, message: str) -> str:
    return dumps({"error": kind, "message": message})


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    if getattr(args, "dt", 1.0) <= 0:
        err.write(_error("input", "--dt must be positive") + "\n")
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except (NumericFailure, np.linalg.LinAlgError) as exc:
        err.write(_error("numeric", str(exc)) + "\n")
        return EXIT_NUMERIC
    except (InputError, ConstraintViolation, KeyError, ValueError) as exc:
        kind = "constraint" if isinstance(exc, ConstraintViolation) else "input"
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        err.write(_error(kind, msg) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
