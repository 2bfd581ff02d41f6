from __future__ import annotations

import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipd_lab.game import (CONVENTIONAL, ConstraintViolation, PayoffParams, StrategyVector,
                          build_markov, expected_payoffs, initial_distribution, normalize,
                          payoff_arrays)
from ipd_lab.pressdyson import REPEAT, TFT, complier_top

from conftest import F, random_params

prob = st.floats(0.0, 1.0)
strategy = st.tuples(prob, prob, prob, prob)


def test_normalize_fixture():
    assert normalize(CONVENTIONAL).as_tuple() == (1.0, 0.6, 0.2, 0.0)
    assert normalize(F) == F


@pytest.mark.parametrize(
    "args, name",
    [((5, 3, 1, 4), "P > S"), ((3, 3, 1, 0), "T > R"), ((5, 1, 1, 0), "R > P"), ((9, 3, 1, 0), "2R > T + S")],
)
def test_constraint_names(args, name):
    with pytest.raises(ConstraintViolation, match=re.escape(name)):
        PayoffParams(*args)


def test_payoff_arrays_rejects_bad_rows():
    with pytest.raises(ConstraintViolation, match="2R > T"):
        payoff_arrays(np.array([[5, 3, 1, 0], [9, 3, 1, 0.0]]))


@pytest.mark.parametrize(
    "v, expected",
    [((1, 0, 0, 0), (0.6, 0.6)), ((0, 0.5, 0.5, 0), (0.5, 0.5)), ((0, 0, 1, 0), (1.0, 0.0))],
)
def test_expected_payoff_fixtures(v, expected):
    assert expected_payoffs(v, F) == pytest.approx(expected, abs=1e-15)


def test_payoff_identities_on_grid():
    rng = np.random.default_rng(1)
    vs = rng.dirichlet(np.ones(4), size=20000)
    vs = np.vstack([vs, np.eye(4)])
    for params in (F, CONVENTIONAL):
        T, R, P, S = params.as_tuple()
        sx = vs @ params.s_x
        sy = vs @ params.s_y
        assert np.allclose(sy - sx, (vs[:, 1] - vs[:, 2]) * (T - S), atol=1e-12)
        mean = (sx + sy) / 2
        assert np.all(mean <= R + 1e-12)
        # equality only at v = cc
        assert np.all(mean[vs[:, 0] < 1 - 1e-9] < R)


def test_strategy_clamp_and_reject():
    s = StrategyVector((1 + 5e-13, -5e-13, 0.5, 0.5))
    assert s.p[:2] == (1.0, 0.0)
    with pytest.raises(ConstraintViolation):
        StrategyVector((1.01, 0, 0, 0))
    with pytest.raises(ConstraintViolation):
        StrategyVector((0.5, 0.5, 0.5))
    assert StrategyVector((1, 0, 1, 0)).init_coop == 1.0


def test_flags():
    assert TFT.agreeable and TFT.firm and not TFT.generous
    assert REPEAT.is_repeat
    assert complier_top(1.0, F).generous


def test_markov_fixtures():
    M = build_markov(TFT, TFT)
    assert M[1].tolist() == [0, 0, 1, 0]
    assert M[2].tolist() == [0, 1, 0, 0]
    assert np.array_equal(build_markov(REPEAT, REPEAT), np.eye(4))
    c = complier_top(1.0, F)
    M = build_markov((0, 0, 0, 0), c)
    assert np.allclose(M[0], [0, 0, 1, 0])
    assert np.allclose(M[1], [0, 0, 1, 0])
    assert np.allclose(M[2], [0, 0, 1 / 6, 5 / 6], atol=1e-15)
    assert np.allclose(M[3], [0, 0, 1 / 3, 2 / 3], atol=1e-15)


def _markov_oracle(p, q):
    # enumerate joint plays explicitly from each state
    M = np.zeros((4, 4))
    for s in range(4):
        x_c = p[s]
        y_c = q[[0, 2, 1, 3][s]]
        for xi, x_prob in ((0, x_c), (1, 1 - x_c)):
            for yi, y_prob in ((0, y_c), (1, 1 - y_c)):
                M[s, 2 * xi + yi] += x_prob * y_prob
    return M


def test_markov_row_stochastic_random():
    rng = np.random.default_rng(2)
    for _ in range(10000):
        p, q = rng.random(4), rng.random(4)
        M = build_markov(p, q)
        assert np.all(M >= 0)
        assert np.allclose(M.sum(axis=1), 1.0, atol=1e-12)
    for _ in range(200):
        p, q = rng.random(4), rng.random(4)
        assert np.allclose(build_markov(p, q), _markov_oracle(p, q), atol=1e-15)


@given(strategy, strategy)
@settings(max_examples=200, deadline=None)
def test_markov_matches_oracle(p, q):
    p, q = np.array(p), np.array(q)
    assert np.allclose(build_markov(p, q), _markov_oracle(p, q), atol=1e-15)


@pytest.mark.parametrize(
    "pc, qc, v", [(1, 1, (1, 0, 0, 0)), (0, 0, (0, 0, 0, 1)), (0.5, 0.5, (0.25,) * 4)]
)
def test_initial_distribution(pc, qc, v):
    assert initial_distribution(pc, qc).tolist() == list(v)


def test_normalize_preserves_payoff_order():
    rng = np.random.default_rng(3)
    rows = random_params(rng, 50)
    vs = rng.dirichlet(np.ones(4), size=200)
    for T, R, P, S in rows:
        raw = PayoffParams(T, R, P, S)
        n = normalize(raw)
        a, b = vs @ raw.s_x, vs @ n.s_x
        assert np.allclose((a - S) / (T - S), b, atol=1e-12)
        # an increasing affine map keeps every pairwise comparison
        da, db = np.subtract.outer(a, a), np.subtract.outer(b, b)
        assert np.array_equal(np.sign(da)[np.abs(da) > 1e-9], np.sign(db)[np.abs(da) > 1e-9])
