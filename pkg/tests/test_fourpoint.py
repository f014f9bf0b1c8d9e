import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stronghyp import fourpoint
from stronghyp.spaces import FiniteMetricSpace

import oracles

LOG2 = math.log(2)


def _space(D):
    return FiniteMetricSpace(D)


@pytest.fixture(scope="module")
def small(corpus):
    return [D for _, D in corpus if len(D) <= 7][:30]


def test_delta_matches_brute_force(small):
    for D in small:
        s = _space(D)
        ref = oracles.delta_four_point(D.tolist())
        assert fourpoint.delta_four_point(s).value == ref
        assert fourpoint.delta_product(s).value == oracles.delta_product(D.tolist())


def test_delta_witness_attains_value(corpus):
    for _, D in corpus[:40]:
        s = _space(D)
        d = fourpoint.delta_four_point(s)
        assert fourpoint.four_point_gap(s, *d.witness) == d.value


def test_eps_star_matches_brentq(small):
    for D in small:
        s = _space(D)
        ref = oracles.eps_star(D.tolist())
        got = fourpoint.eps_star(s)
        if math.isinf(ref):
            assert math.isinf(got.value)
        else:
            assert got.value == pytest.approx(ref, abs=2e-10)
            assert got.value <= ref + 1e-12  # reported from below


def test_eps_star_prescreen_is_transparent(corpus):
    for _, D in corpus[:60]:
        s = _space(D)
        a = fourpoint.eps_star(s, prescreen=True).value
        b = fourpoint.eps_star(s, prescreen=False).value
        assert a == b or (math.isinf(a) and math.isinf(b))


def test_threads_do_not_change_results(corpus):
    for _, D in corpus[:20]:
        s = _space(D)
        assert fourpoint.delta_four_point(s, threads=1) == fourpoint.delta_four_point(s, threads=3)
        assert fourpoint.eps_star(s, threads=1) == fourpoint.eps_star(s, threads=3)


def test_tree_is_zero_hyperbolic():
    # star with three unit arms plus a path: a tree metric
    s = oracles.dyadic_corpus(count=5, seed=3)
    trees = [D for kind, D in oracles.dyadic_corpus(count=40, seed=5) if kind == "tree"]
    for D in trees:
        sp = _space(D)
        assert fourpoint.delta_four_point(sp).value == 0.0
        assert math.isinf(fourpoint.eps_star(sp).value)
        assert fourpoint.is_strongly_hyperbolic(sp, 50.0)[0]
    assert s  # corpus generator is deterministic and nonempty


def test_unit_square_cycle():
    # 4-cycle with unit edges: gap p = 1, q = 1, root exp(-e) = 1/2
    D = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    s = _space(D)
    assert fourpoint.delta_four_point(s).value == 1.0
    assert fourpoint.eps_star(s).value == pytest.approx(LOG2, abs=1e-9)
    assert fourpoint.quadruple_eps(s, 0, 1, 2, 3) == pytest.approx(LOG2, abs=1e-9)


def test_strong_and_ptolemy_against_oracles(small):
    for D in small[:12]:
        s = _space(D)
        e = fourpoint.eps_star(s).value
        for eps in ([0.5, 1.0, 3.0] if math.isinf(e) else [0.5 * e, e, 2 * e]):
            ref = oracles.strongly_hyperbolic(D.tolist(), eps)
            assert fourpoint.is_strongly_hyperbolic(s, eps)[0] == ref
            for o in range(s.n):
                assert fourpoint.is_ptolemaic_visual(s, eps, o) == oracles.ptolemaic_visual(D.tolist(), eps, o)


def test_strong_margin_witness_reproduces():
    D = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    s = _space(D)
    ok, w, m = fourpoint.is_strongly_hyperbolic(s, 2.0)
    x, y, z, o = w
    E = lambda a, b: math.exp(-2.0 * oracles.gp(D, a, b, o))  # noqa: E731
    assert not ok and m == pytest.approx((E(x, z) + E(z, y)) / E(x, y) - 1)


def test_eps_must_be_positive():
    s = _space([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        fourpoint.is_strongly_hyperbolic(s, 0.0)
    with pytest.raises(ValueError):
        fourpoint.visual_matrix(s, -1.0, 0)


def test_defect_arrays_brute_force():
    D = np.array([[0, 1, 2, 1.5], [1, 0, 1, 2], [2, 1, 0, 1], [1.5, 2, 1, 0]])
    A, B = fourpoint.defect_arrays(_space(D))
    for x, y, z, t in np.ndindex(4, 4, 4, 4):
        assert A[x, y, z, t] == 0.5 * ((D[x, y] + D[z, t]) - (D[x, z] + D[y, t]))
        assert B[x, y, z, t] == 0.5 * ((D[x, y] + D[z, t]) - (D[x, t] + D[z, y]))
    assert len(fourpoint.defect_statistics(_space(D))) == 256


def test_check_EB_and_strong_bolicity():
    D = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    s = _space(D)
    ok, viol = fourpoint.check_EB(s, 0.1, 1.0, 1.0)
    assert not ok and viol
    assert fourpoint.check_EB(s, 100.0, 0.1, 1.0)[0]
    with pytest.raises(ValueError):
        fourpoint.check_EB(s, 0, 1, 1)
    assert fourpoint.check_strong_bolicity(s, 10.0, 2.0, 2.0)[0]
    assert not fourpoint.check_strong_bolicity(s, 0.5, 4.0, 0.0)[0]


def test_analyze_report_fields(corpus):
    _, D = corpus[1]
    r = fourpoint.analyze(_space(D))
    j = r.to_json()
    assert j["n"] == len(D) and j["delta_exact"]
    assert set(j["witnesses"]) >= {"delta", "eps_star"}


def test_analyze_large_space_uses_basepoint_bound():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 2))
    s = FiniteMetricSpace.from_points(X)
    r = fourpoint.analyze(s, quartic_cap=10, ptolemy_cap=5)
    exact = fourpoint.delta_four_point(s).value
    assert not r.delta_exact and r.delta >= exact - 1e-12
    assert r.ptolemaic_at_eps is None


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_property_delta_bound_and_equivalence(n, seed):
    rng = np.random.default_rng(seed)
    W = np.where(rng.random((n, n)) < 0.6, rng.integers(1, 65, (n, n)) / 16, 0.0)
    W = np.triu(W, 1)
    W[np.arange(n - 1), np.arange(1, n)] = 1.0
    D = oracles._closure(W + W.T)
    s = _space(D)
    d = fourpoint.delta_four_point(s).value
    assert d == fourpoint.delta_product(s).value
    e = fourpoint.eps_star(s).value
    if math.isfinite(e):
        assert d <= LOG2 / e + 1e-9
        for eps in (0.5 * e, e, 2 * e):
            sh = fourpoint.is_strongly_hyperbolic(s, eps)[0]
            assert all(fourpoint.is_ptolemaic_visual(s, eps, o) == sh for o in range(n))
