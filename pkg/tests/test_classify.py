from __future__ import annotations

import numpy as np
import pytest

from ipd_lab.classify import (FLAGS, classify, classify_both, classify_coords, coords_flags,
                              exploit_probe, pair_convergence, strategy_flags)
from ipd_lab.game import (CONVENTIONAL, ConstraintViolation, PayoffParams, StrategyVector,
                          build_markov, expected_payoffs, initial_distribution, normalize)
from ipd_lab.markov import limit_distribution
from ipd_lab.pressdyson import (ALLC, ALLD, GRIM, LAME, PAVLOV, REPEAT, TFT, VERTEX,
                                complier_point, decompose, edge, equalizer_point,
                                extortion_point, x_press_dyson, zds_top)

from conftest import F, random_params

PURE = [np.array([(k >> i) & 1 for i in (3, 2, 1, 0)], dtype=float) for k in range(16)]


def _payoffs(p, q, params, init=(0.5, 0.5)):
    v = limit_distribution(build_markov(p, q), initial_distribution(*init))
    return expected_payoffs(v, params)


@pytest.mark.parametrize(
    "s, expected",
    [
        (TFT, dict(good=True, nash_type=True, exceptional=True, zds=True, strictly_firm=False)),
        (GRIM, dict(good=True, nash_type=True, exceptional=True, zds=False)),
        (PAVLOV, dict(good=False, nash_type=True, agreeable=True, firm=False)),
        (REPEAT, dict(is_repeat=True, nash_type=False, good=False, zds=False, equalizer=False)),
        (LAME, dict(nash_type=False, good=False, exceptional=True)),
        (ALLC, dict(nash_type=False, generous=True)),
        (ALLD, dict(strictly_firm=True, firm=True, agreeable=False, zds=False, extortion=False)),
    ],
)
def test_fixture_flags(s, expected):
    r = classify(s, CONVENTIONAL)
    c = classify_coords(decompose(x_press_dyson(s), F), CONVENTIONAL)
    for k, v in expected.items():
        assert getattr(r, k) is v, k
    assert r.flags() == c.flags()


def test_pavlov_margins():
    r = classify(PAVLOV, CONVENTIONAL)
    assert r.margins["nash_m1"] == pytest.approx(1.0)
    assert r.margins["nash_m2"] == pytest.approx(0.0, abs=1e-15)
    assert r.margins["firm_m1"] is None


def test_edge_is_nash_not_good():
    r = classify(edge(F), F)
    assert r.nash_type and not r.good
    assert r.margins["nash_m1"] == pytest.approx(0, abs=1e-12)


def test_equalizer_fixture():
    p = (1, 1 / 3, 1, 2 / 3)
    for r in classify_both(p, CONVENTIONAL):
        assert r.equalizer and r.zds and r.nash_type and not r.good and r.agreeable


@pytest.mark.parametrize(
    "pt, flag",
    [
        (complier_point(1.0, F), "complier"),
        (complier_point(0.3, F), "complier"),
        (extortion_point(1.0, F), "extortion"),
        (extortion_point(4.0, F), "extortion"),
        (equalizer_point(0.4), "equalizer"),
        (VERTEX, "vertex"),
    ],
)
def test_zds_family_flags(pt, flag):
    s = zds_top(pt, F)
    for r in classify_both(s, CONVENTIONAL):
        assert r.zds and getattr(r, flag), (r.form, flag)
        others = {"complier", "extortion", "vertex"} - {flag}
        assert not any(getattr(r, k) for k in others)


def test_complier_is_good_and_extortion_is_strictly_firm_oracle():
    # semantic oracle: good strategies are never beaten at R; compliers are good
    s = zds_top(complier_point(1.0, F), F)
    assert classify(s, F).good
    e = zds_top(extortion_point(1.0, F), F)
    assert not classify(e, F).strictly_firm


def test_raw_vs_coords_agree_large_sample():
    rng = np.random.default_rng(21)
    n = 200_000
    params = random_params(rng, n)
    p = rng.random((n, 4))
    # force boundary structure often
    for j in range(4):
        m = rng.random(n) < 0.3
        p[m, j] = rng.integers(0, 2, m.sum())
    raw = strategy_flags(p, params)
    span = params[:, 0] - params[:, 3]
    rows = np.stack([np.ones(n), (params[:, 1] - params[:, 3]) / span,
                     (params[:, 2] - params[:, 3]) / span, np.zeros(n)], -1)
    c = decompose(p - np.array([1.0, 1.0, 0, 0]), rows)
    co = coords_flags(c, params)
    for k in FLAGS:
        if k == "equalizer":
            # the coordinate test assumes zds; compare on zds rows
            m = raw["zds"]
            assert np.array_equal(raw[k][m], co[k][m]), k
        else:
            assert np.array_equal(raw[k], co[k]), k
    ag = raw["agreeable"]
    for k in ("nash_m1", "nash_m2"):
        assert np.allclose(raw[k][ag], co[k][ag], atol=1e-9)
    fm = raw["firm"]
    for k in ("firm_m1", "firm_m2"):
        assert np.allclose(raw[k][fm], co[k][fm], atol=1e-9)
    assert np.allclose(raw["delta"], co["delta"], atol=1e-12)


def test_nash_type_semantics():
    # Nash type: no opponent gets more than R; oracle is the Markov chain itself
    rng = np.random.default_rng(22)
    checked = 0
    while checked < 150:
        p = np.array([1.0, *rng.random(3)])
        if rng.random() < 0.3:
            p[3] = 0.0
        r = classify(p, F)
        if not r.nash_type:
            continue
        checked += 1
        qs = PURE + [rng.random(4) for _ in range(30)]
        for q in qs:
            for init in ((1, 1), (0.5, 0.5), (1, 0)):
                sx, sy = _payoffs(p, q, F, init)
                assert sy <= F.R + 1e-9
                if r.good and sy >= F.R - 1e-9:
                    assert sx == pytest.approx(F.R, abs=1e-8)


def test_not_nash_is_exploitable():
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 200:
        p = np.array([1.0, *rng.random(3)])
        r = classify(p, F)
        if r.nash_type:
            continue
        checked += 1
        rep = exploit_probe(StrategyVector(tuple(p)), F)
        assert rep.nash_witness is not None
        assert not rep.certified_good


def test_strictly_firm_semantics():
    rng = np.random.default_rng(24)
    checked = 0
    while checked < 150:
        p = np.array([*rng.random(3), 0.0])
        p[rng.random(4) < 0.3] = 0.0
        if not classify(p, F).strictly_firm:
            continue
        checked += 1
        for q in PURE + [rng.random(4) for _ in range(20)]:
            sx, sy = _payoffs(p, q, F)
            assert sy <= F.P + 1e-9
            assert sx >= F.P - 1e-9


def test_exceptional_square_geometry():
    # agreeable and firm: p1 = 1, p4 = 0; Nash iff p3 <= (R-S)/(T-R) (1-p2)
    for p2 in np.linspace(0, 0.99, 12):
        lim = (F.R - F.S) / (F.T - F.R) * (1 - p2)
        for p3 in (lim - 1e-6, lim + 1e-6):
            if not 0 <= p3 <= 1:
                continue
            r = classify((1, p2, p3, 0), F)
            assert r.exceptional
            assert r.nash_type == (p3 < lim)


def test_probes():
    rep = exploit_probe(TFT, F)
    assert rep.certified_good and rep.good_witness is None
    assert all(r.s_y < F.R for r in rep.results)
    cyc = next(r for r in rep.results if r.name == "0111")
    assert cyc.s_y == pytest.approx((1 + F.R) / 3)
    rep = exploit_probe(StrategyVector((1, 0.5, 1, 0)), F)
    assert rep.nash_witness is not None
    best = max(r.s_y for r in rep.results)
    assert best > F.R
    rep = exploit_probe(PAVLOV, F)
    assert rep.good_witness == "alld" and rep.nash_witness is None
    r = next(x for x in rep.results if x.name == "alld")
    assert r.s_y == pytest.approx(0.6) and r.s_x == pytest.approx(0.1)
    with pytest.raises(ConstraintViolation):
        exploit_probe(LAME, F)
    with pytest.raises(ConstraintViolation):
        exploit_probe(ALLD, F)


def test_pair_convergence():
    g = StrategyVector((1, 0.1, 0.2, 0.3))
    assert classify(g, F).nash_type and classify(g, F).generous
    pc = pair_convergence(g, g, F)
    assert pc.cc_unique and pc.hypotheses_met
    pc = pair_convergence(TFT, TFT, F)
    assert not pc.hypotheses_met and not pc.cc_unique
    pc = pair_convergence(g, ALLD, F)
    assert not pc.hypotheses_met and not pc.cc_unique


def test_pair_convergence_hypotheses_imply_cc():
    rng = np.random.default_rng(25)
    hits = 0
    for _ in range(3000):
        p = StrategyVector((1.0, *rng.random(3)))
        q = StrategyVector((1.0, *rng.random(3)))
        pc = pair_convergence(p, q, F)
        if pc.hypotheses_met:
            hits += 1
            assert pc.cc_unique
    assert hits > 50


def test_report_dict_and_params_units():
    a = classify(TFT, CONVENTIONAL).to_dict()
    b = classify(TFT, F).to_dict()
    assert a["good"] and a.keys() == b.keys()
    assert {k: a[k] for k in FLAGS} == {k: b[k] for k in FLAGS}
    for k, v in a["margins"].items():
        assert v == pytest.approx(b["margins"][k], abs=1e-12)
    raw = PayoffParams(7.0, 4.0, 1.5, -2.0)
    p = (1, 0.2, 0.3, 0.1)
    assert classify(p, raw).flags() == classify(p, normalize(raw)).flags()
