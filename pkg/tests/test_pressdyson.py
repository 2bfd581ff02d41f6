from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipd_lab.game import ConstraintViolation, PayoffParams, StrategyVector, normalize
from ipd_lab.pressdyson import (ALLC, ALLD, E12, GRIM, PAVLOV, REPEAT, TFT, VERTEX, BarCoords,
                                PressDysonCoords, ZdsPoint, bar_coords, basis_matrix,
                                check_constraints, complier_point, complier_top, decompose,
                                edge, equalizer_point, extortion_point, inverse_basis, recompose,
                                top_strategy, x_press_dyson, y_press_dyson, zds_delta, zds_top)

from conftest import F, random_params


def _solve_coords(pt, params):
    return np.linalg.solve(basis_matrix(params), pt)


def test_press_dyson_vectors():
    assert x_press_dyson(TFT).tolist() == [0, -1, 1, 0]
    assert x_press_dyson(REPEAT).tolist() == [0, 0, 0, 0]
    assert np.allclose(y_press_dyson(complier_top(1.0, F)), [0, 1, -5 / 6, 1 / 3])


@pytest.mark.parametrize(
    "s, coords",
    [
        (TFT, (1, -1, 0, 0)),
        (GRIM, (0.5, -0.5, 0, -0.5)),
        (PAVLOV, (-0.75, -1.75, 1.5, -0.75)),
    ],
)
def test_decompose_fixtures(s, coords):
    c = decompose(x_press_dyson(s), F)
    assert np.allclose(c, coords, atol=1e-14)
    assert np.allclose(c, _solve_coords(x_press_dyson(s), F), atol=1e-14)


def test_recompose_fixtures():
    assert np.allclose(recompose(PressDysonCoords(1, -1, 0, 0), F), [0, -1, 1, 0])
    assert np.allclose(recompose(PressDysonCoords(0, 0, 0, 0), F), 0)
    # agreeable ZDS on the Z = R line, alpha_bar = 1, gamma = 1/2
    c = PressDysonCoords(0.5, 0.5 * (-1 / 0.6 - 1), 0.5, 0.0)
    assert np.allclose(recompose(c, F), [0, -5 / 6, 1, 1 / 3], atol=1e-15)


def test_inverse_basis_against_numpy():
    rng = np.random.default_rng(5)
    for T, R, P, S in random_params(rng, 100):
        n = normalize(PayoffParams(T, R, P, S))
        assert np.allclose(inverse_basis(n), np.linalg.inv(basis_matrix(n)), atol=1e-10)


def test_basis_determinant():
    rng = np.random.default_rng(6)
    for T, R, P, S in random_params(rng, 100):
        params = PayoffParams(T, R, P, S)
        det = np.linalg.det(basis_matrix(params))
        assert det == pytest.approx(-2 * (R - P) * (T - S), rel=1e-10)


def test_roundtrip_many():
    rng = np.random.default_rng(7)
    rows = random_params(rng, 100_000)
    span = rows[:, 0] - rows[:, 3]
    norm = np.stack([np.ones(len(rows)), (rows[:, 1] - rows[:, 3]) / span,
                     (rows[:, 2] - rows[:, 3]) / span, np.zeros(len(rows))], axis=-1)
    pt = rng.uniform(-1, 1, (100_000, 4))
    c = decompose(pt, norm)
    R, P = norm[:, 1], norm[:, 2]
    back = (c.alpha + c.beta)[:, None] * np.stack([R, np.zeros_like(R), np.zeros_like(R), P], -1)
    back = back + np.stack([c.alpha * 0, c.beta, c.alpha, c.alpha * 0], -1)
    back = back + c.gamma[:, None] + c.delta[:, None] * np.array([0, 1, 1, 0])
    assert np.abs(back - pt).max() <= 1e-12


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(0.01, 10))
@settings(max_examples=300, deadline=None)
def test_roundtrip_and_scaling(v, a):
    pt = np.array(v)
    c = np.array(decompose(pt, F))
    assert np.allclose(recompose(PressDysonCoords(*c), F), pt, atol=1e-12)
    assert np.allclose(decompose(a * pt, F), a * c, atol=1e-12 * max(1, a))
    assert np.allclose(decompose(recompose(PressDysonCoords(*v), F), F), v, atol=1e-12)


def test_constraints():
    r = check_constraints(decompose(x_press_dyson(TFT), F), F)
    assert r.sign_ok and r.size_ok and r.structure_ok
    r = check_constraints(PressDysonCoords(1, 1, 0, 0), F)
    assert not r.sign_ok and not r.structure_ok
    g = decompose(x_press_dyson(GRIM), F)
    r = check_constraints(PressDysonCoords(*(3 * np.array(g))), F)
    assert r.sign_ok and not r.size_ok


def test_structure_on_random_strategies():
    rng = np.random.default_rng(8)
    for _ in range(2000):
        p = rng.random(4)
        p[rng.random(4) < 0.3] = rng.integers(0, 2)
        r = check_constraints(decompose(x_press_dyson(p), F), F)
        assert r.sign_ok and r.size_ok and r.structure_ok


def test_top_strategy():
    top, a = top_strategy(StrategyVector((1, 0.5, 0.5, 0)))
    assert top.p == TFT.p and a == 0.5
    assert top_strategy(TFT) == (TFT, 1.0)
    top, a = top_strategy(StrategyVector((1, 5 / 6, 1 / 6, 0)))
    assert np.allclose(top.p, TFT.p) and a == pytest.approx(1 / 6)
    with pytest.raises(ConstraintViolation, match="no top form"):
        top_strategy(REPEAT)


def test_bar_coords():
    b = bar_coords(decompose(x_press_dyson(PAVLOV), F), F)
    assert np.allclose(b, (-0.5, -7 / 6, -0.5, 0.6))
    eq = decompose(np.array([0, -2 / 3, 1, 2 / 3]), F)
    b = bar_coords(eq, F)
    assert b.alpha_bar == pytest.approx(0, abs=1e-15)
    assert b.beta_bar == pytest.approx(-5 / 3) and b.Z == pytest.approx(0.6)
    b = bar_coords(decompose(x_press_dyson(complier_top(1.0, F)), F), F)
    assert np.allclose(b[:3], (1, -8 / 3, 0), atol=1e-12) and b.Z == pytest.approx(0.6)
    with pytest.raises(ConstraintViolation, match="exceptional"):
        bar_coords(decompose(x_press_dyson(TFT), F))


def test_bar_coords_bounds_random():
    rng = np.random.default_rng(9)
    for _ in range(2000):
        p = rng.random(4)
        c = decompose(x_press_dyson(p), F)
        b = bar_coords(c, F)
        assert F.P - 1e-9 <= b.Z <= F.R + 1e-9


def test_complier_top():
    assert np.allclose(complier_top(1.0, F).p, (1, 1 / 6, 1, 1 / 3))
    with pytest.raises(ConstraintViolation):
        complier_top(0.0, F)
    big = complier_top(1e9, F)
    assert big.p[1] < 1e-8 and big.p[3] < 1e-8


def test_zds_delta():
    assert zds_delta(x_press_dyson(TFT), F) == 0
    assert zds_delta(x_press_dyson(ALLD), F) == pytest.approx(0.25)
    g = normalize(PayoffParams(1.0, 0.6, 0.4, 0.0))
    assert zds_delta(x_press_dyson(ALLD), g) == pytest.approx(0, abs=1e-15)
    assert zds_delta(x_press_dyson(ALLC), g) == pytest.approx(0, abs=1e-15)
    rng = np.random.default_rng(10)
    pts = rng.uniform(-1, 1, (1000, 4))
    assert np.allclose(zds_delta(pts, F), decompose(pts, F).delta, atol=1e-14)


def test_strip_determinant_positive():
    rng = np.random.default_rng(11)
    pts = []
    while len(pts) < 100_000:
        a = rng.uniform(-1, 6, 200_000)
        s = rng.uniform(-1 / F.P, -1 / F.R, 200_000)
        ok = (a >= -1) & (s - a <= -1)
        pts.extend(zip(a[ok], (s - a)[ok]))
    pts = np.array(pts[:100_000])
    a, b = pts[:, 0], pts[:, 1]
    assert np.all(-b >= np.maximum(1, np.abs(a)) - 1e-12)
    i, j = rng.integers(0, len(pts), (2, 100_000))
    D = b[i] * b[j] - a[i] * a[j]
    assert np.all(D > 0)
    assert VERTEX.in_strip(F) and VERTEX.is_vertex()
    assert not VERTEX.in_strip(normalize(PayoffParams(1.0, 0.8, 0.6, 0.0)))


def test_zds_top_is_zds_for_either_role():
    for pt in (complier_point(1.0, F), extortion_point(1.0, F), equalizer_point(0.4), VERTEX):
        s = zds_top(pt, F)
        c = decompose(x_press_dyson(s), F)
        assert abs(c.delta) <= 1e-12
        b = bar_coords(c)
        assert np.allclose((b.alpha_bar, b.beta_bar), pt, atol=1e-12)
        # Y side: Switch(q) - e13 = g (b_bar S_X + a_bar S_Y + 1)
        yc = decompose(y_press_dyson(s), F)
        assert np.allclose((yc.alpha / yc.gamma, yc.beta / yc.gamma), (pt.beta_bar, pt.alpha_bar), atol=1e-12)
    with pytest.raises(ConstraintViolation, match="strip"):
        zds_top(ZdsPoint(0.0, -0.5), F)


def test_edge():
    assert np.allclose(edge(F).p, (1, 1 / 3, 1, 0))


def test_unnormalized_coordinates():
    # alpha^0 = alpha/(T-S), delta^0 = delta; the predicate alpha > k delta is invariant
    rng = np.random.default_rng(12)
    for T, R, P, S in random_params(rng, 200):
        raw = PayoffParams(T, R, P, S)
        n = normalize(raw)
        p = rng.random(4)
        pt = x_press_dyson(p)
        c0 = _solve_coords(pt, raw)
        c = decompose(pt, n)
        assert c0[0] == pytest.approx(c.alpha / (T - S), rel=1e-8, abs=1e-12)
        assert c0[3] == pytest.approx(c.delta, rel=1e-8, abs=1e-12)
        k = (T - S) / (2 * R - (T + S))
        kn = 1 / (2 * n.R - 1)
        assert (c0[0] * (T - S) > k * c0[3] / (T - S) * (T - S)) == (c.alpha > kn * c.delta) or \
            abs(c.alpha - kn * c.delta) < 1e-9
