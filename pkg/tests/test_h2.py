import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stronghyp import fourpoint, h2

import oracles

LOG2 = math.log(2)

upper = st.builds(complex, st.floats(-20, 20), st.floats(1e-3, 20))


def test_hpoint_validation():
    assert h2.HPoint(1.0, 2.0).z == 1 + 2j
    with pytest.raises(ValueError):
        h2.HPoint(0.0, 0.0)
    with pytest.raises(ValueError):
        h2.RBoundaryPoint(math.inf)
    with pytest.raises(ValueError):
        h2.h2_dist(1j, 1 - 1j)


def test_distance_special_values():
    assert h2.h2_dist(1j, 1j) == 0.0
    assert h2.h2_dist(1j, math.e * 1j) == pytest.approx(1.0, abs=1e-15)
    assert h2.h2_dist(h2.HPoint(0, 1), h2.HPoint(0, 4)) == pytest.approx(math.log(4), abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(upper, upper)
def test_distance_matches_arccosh(z1, z2):
    d = h2.h2_dist(z1, z2, check=True)
    ref = oracles.h2_arccosh(z1, z2)
    assert d == pytest.approx(ref, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(upper, upper, upper)
def test_isometry_invariance(z1, z2, a):
    # z -> c z + t preserves the distance
    c, t = a.imag, a.real
    assert h2.h2_dist(c * z1 + t, c * z2 + t) == pytest.approx(h2.h2_dist(z1, z2), rel=1e-9, abs=1e-9)
    # z -> -1/z as well
    assert h2.h2_dist(-1 / z1, -1 / z2) == pytest.approx(h2.h2_dist(z1, z2), rel=1e-7, abs=1e-7)


@settings(max_examples=300, deadline=None)
@given(upper, upper, upper, upper)
def test_four_point_margin_nonnegative(a, b, c, d):
    m = h2.margins(np.array([[a, b, c, d]]))[0]
    scale = max(abs(h2.pair_norm(a, b)), abs(h2.pair_norm(c, d)), 1.0) ** 2
    assert m >= -1e-12 * scale


def test_margin_equals_exponential_four_point_form():
    """N12 N34 + N14 N23 >= N13 N24 is exp(d/2) Ptolemy for the hyperbolic distance."""
    q = h2.sample_h2_quadruples(count=200, seed=5)
    for a, b, c, d in q:
        D = lambda u, v: math.exp(h2.h2_dist(u, v) / 2)  # noqa: E731
        lhs = D(a, b) * D(c, d) + D(a, d) * D(b, c) - D(a, c) * D(b, d)
        scale = 4 * math.sqrt(a.imag * b.imag * c.imag * d.imag)
        assert h2.h2_four_point_margin(a, b, c, d) == pytest.approx(lhs * scale, rel=1e-8, abs=1e-9)


def test_sampler_is_seeded_and_in_bounds():
    q1 = h2.sample_h2_quadruples((-1, 1, 0, 2), 1000, seed=3)
    q2 = h2.sample_h2_quadruples((-1, 1, 0, 2), 1000, seed=3)
    assert np.array_equal(q1, q2) and q1.shape == (1000, 4)
    assert np.all(q1.imag > 0) and np.all(q1.imag <= 2) and np.all(np.abs(q1.real) <= 1)
    with pytest.raises(ValueError):
        h2.sample_h2_quadruples((-1, 1, -1, 2), 10)
    with pytest.raises(ValueError):
        h2.sample_h2_quadruples((1, -1, 0, 2), 10)


def test_delta_defect_bounded_by_log2():
    q = h2.sample_h2_quadruples(count=20000, seed=11)
    d = h2.h2_delta_defect(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
    assert d.max() <= LOG2 + 1e-9


def test_boundary_products():
    assert h2.boundary_product_i(1.0, -1.0) == pytest.approx(math.log(2 / 2), abs=1e-15)
    assert h2.boundary_product_i(0.0, 1.0) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    with pytest.raises(ValueError):
        h2.boundary_product_i(0.3, 0.3)
    lim = h2.boundary_product_limit(0.5, -2.0)
    assert lim.monotone and lim.final_error < 1e-9


@pytest.mark.parametrize("a", [1.0, 0.1, 0.01, 1e-3])
def test_defect_closed_form(a):
    assert h2.boundary_defect(a) == pytest.approx(math.log(2 / math.sqrt(a * a + 1)), abs=1e-13)
    assert h2.interior_defect(a, 1e-7) == pytest.approx(h2.boundary_defect(a), abs=1e-5)
    assert h2.interior_defect(a, 1e-7) <= LOG2 + 1e-12


def test_optimal_delta_rows_increase_to_log2():
    rows = h2.optimal_delta_experiment([1, 0.1, 0.01, 1e-4])
    vals = [d for _, d in rows]
    assert vals == sorted(vals) and LOG2 - vals[-1] < 1e-8
    with pytest.raises(ValueError):
        h2.optimal_delta_experiment([0.0])


def test_quotient_ptolemy():
    q = h2.sample_planar_quadruples(count=20000, seed=2)
    m = h2.quotient_ptolemy_margin(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
    assert m.min() >= -1e-9
    assert h2.averaged_quotient_distance(1 + 1j, 1 - 1j) == pytest.approx(1.0)


def test_h2_subset_is_strongly_hyperbolic_with_parameter_one():
    q = h2.sample_h2_quadruples((-3, 3, 0.1, 3), count=3, seed=9).ravel()
    s = h2.h2_space(q)
    assert fourpoint.is_strongly_hyperbolic(s, 1.0)[0]
    assert fourpoint.eps_star(s).value >= 1.0 - 1e-9
