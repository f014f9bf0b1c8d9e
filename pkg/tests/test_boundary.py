import math

import numpy as np
import pytest

from stronghyp import boundary
from stronghyp.boundary import Cylinder, Ray, VisualParams
from stronghyp.errors import UnsupportedModelError
from stronghyp.freegroup import WalkMeasure, parse_word

LOG3 = math.log(3)


@pytest.fixture(scope="module")
def srw_green(srw):
    return VisualParams(1.0, "green", srw)


@pytest.fixture(scope="module")
def nu_green(nonuniform):
    return VisualParams(1.0, "green", nonuniform)


def test_ray_canonical_form_and_parse():
    r = Ray.parse("ab(ab)")
    assert r == Ray((), (0, 2)) and str(r) == "(ab)"
    assert Ray.parse("(abab)") == Ray((), (0, 2))
    assert Ray.parse("b(a)").letters(4) == (2, 0, 0, 0)
    with pytest.raises(ValueError):
        Ray.parse("ab")
    with pytest.raises(ValueError):
        Ray((0,), (1,))  # a then a' cancels
    with pytest.raises(ValueError):
        Ray((), (0, 2, 1))  # a b a' repeated cancels a'a at the seam
    assert Ray.parse("(a)").translate("a'") == Ray.parse("(a)")
    assert Ray.parse("(a)").translate("b") == Ray.parse("b(a)")


def test_cylinders():
    c = Cylinder.parse("ab")
    assert c.depth == 2 and c.contains(Ray.parse("ab(b)")) and not c.contains(Ray.parse("ab'(a)"))
    assert c.contains(c.representative())
    assert sorted(str(x) for x in c.children(2)) == ["aba", "aba'", "abb"]
    assert len(boundary.cylinders_at_depth(2, 2)) == 12
    with pytest.raises(ValueError):
        Cylinder(())
    with pytest.raises(ValueError):
        Cylinder((0, 1))


def test_word_visual_metric():
    p = VisualParams.word(2, eps=1.0)
    xi, xi2 = Ray.parse("ab(a)"), Ray.parse("ab'(a)")
    assert boundary.boundary_gromov_product(xi, xi2, p) == 1.0
    assert boundary.visual_distance(xi, xi2, p) == pytest.approx(math.exp(-1))
    assert boundary.visual_distance(xi, xi, p) == 0.0
    assert p.word_dimension(2) == pytest.approx(LOG3)


def test_green_lengths_are_exact_for_nn(srw_green):
    assert srw_green.length("ab'") == pytest.approx(2 * LOG3, abs=1e-14)
    assert srw_green.dimension == 1.0
    with pytest.raises(ValueError):
        VisualParams.word(2).dimension


def test_busemann_closed_form(srw_green):
    # beta(e, z; (a)) = lim |a^n, e| - |a^n, z|: +log 3 toward the ray, -log 3 away from it
    xi = Ray.parse("(a)")
    assert boundary.busemann(srw_green, (), "a", xi) == pytest.approx(LOG3, abs=1e-12)
    assert boundary.busemann(srw_green, (), "a'", xi) == pytest.approx(-LOG3, abs=1e-12)
    assert boundary.busemann(srw_green, (), "b", xi) == pytest.approx(-LOG3, abs=1e-12)
    with pytest.raises(ValueError):
        boundary.busemann(srw_green, (), "a'", xi, depth=1)


def test_harmonic_measure_exact(srw, nonuniform):
    assert boundary.harmonic_measure_exact(srw, "a").value == pytest.approx(0.25)
    assert boundary.harmonic_measure_exact(srw, "ab").value == pytest.approx(1 / 12)
    total = sum(boundary.harmonic_measure_exact(nonuniform, c).value for c in boundary.cylinders_at_depth(2, 3))
    assert total == pytest.approx(1.0, abs=1e-12)
    # additivity over children
    for c in boundary.cylinders_at_depth(2, 2):
        kids = sum(boundary.harmonic_measure_exact(nonuniform, k).value for k in c.children(2))
        assert kids == pytest.approx(boundary.harmonic_measure_exact(nonuniform, c).value, abs=1e-14)
    with pytest.raises(UnsupportedModelError):
        boundary.harmonic_measure_exact(WalkMeasure(2, {"ab": .25, "b'a'": .25, "b": .25, "b'": .25}), "a")


def test_harmonic_measure_mc(nonuniform):
    cyl = boundary.cylinders_at_depth(2, 1)
    est = boundary.harmonic_measure_mc(nonuniform, cyl, 20_000, seed=3)
    for c, e in zip(cyl, est):
        assert e.agrees(boundary.harmonic_measure_exact(nonuniform, c).value, 4)
    with pytest.raises(ValueError):
        boundary.harmonic_measure_mc(nonuniform, cyl, 10, stabilization_depth=2)


def test_hausdorff_word_metric_is_uniform():
    p = VisualParams.word(2)
    r = boundary.hausdorff_cylinder_measure(p, 2, "ab")
    assert r.converged and r.estimate.value == pytest.approx(1 / 12, abs=1e-12)


def test_hausdorff_green_equals_harmonic_nonuniform(nonuniform, nu_green):
    for c in boundary.cylinders_at_depth(2, 2):
        h = boundary.hausdorff_cylinder_measure(nu_green, 2, c).estimate.value
        assert h == pytest.approx(boundary.harmonic_measure_exact(nonuniform, c).value, abs=1e-9)


def test_hausdorff_strict_convergence_error(nu_green):
    from stronghyp.errors import ConvergenceError

    with pytest.raises(ConvergenceError):
        boundary.hausdorff_cylinder_measure(nu_green, 2, "ab", tol=0.0, depth_cap=10)
    r = boundary.hausdorff_cylinder_measure(nu_green, 2, "ab", tol=0.0, depth_cap=10, strict=False)
    assert not r.converged


def test_pushforward_cases(srw, nonuniform):
    # g [w] = [g w] when nothing cancels
    assert boundary.pushforward_measure(srw, "b", Cylinder.parse("a")) == pytest.approx(1 / 12)
    # a' . [a] is everything except [a']
    assert boundary.pushforward_measure(srw, "a'", Cylinder.parse("a")) == pytest.approx(0.75)
    # ab . [b'] = complement of a [b]... total over a partition is preserved
    g = parse_word("ab")
    tot = sum(boundary.pushforward_measure(nonuniform, g, c) for c in boundary.cylinders_at_depth(2, 1))
    assert tot == pytest.approx(1.0, abs=1e-12)


def test_radon_nikodym_refinement(nonuniform):
    r1 = boundary.radon_nikodym_check(nonuniform, "ab", Cylinder.parse("b'"), 1)
    r2 = boundary.radon_nikodym_check(nonuniform, "ab", Cylinder.parse("b'"), 2)
    assert r2.gap < r1.gap
    assert r2.gap < 1e-12 and r2.piece_gap < 1e-12
    with pytest.raises(ValueError):
        boundary.radon_nikodym_check(nonuniform, "a", Cylinder.parse("ab"), 1)


def test_srw_radon_nikodym_hand_value(srw):
    # ab [b'] = a (b [b']) is the complement of a [b] = [ab], so the ratio is (1 - 1/12) / (1/4)
    r = boundary.radon_nikodym_check(srw, "ab", Cylinder.parse("b'"), 3)
    assert r.ratio == pytest.approx(11 / 3, abs=1e-12)
    assert r.integral == pytest.approx(11 / 3, abs=1e-9)


def test_conformality(srw_green, nu_green):
    xi, xi2 = Ray.parse("(a)"), Ray.parse("(b)")
    # a xi = (a), a xi2 = a(b): products 0 before and one letter after translation
    r = boundary.conformality_check(VisualParams.word(2), "a", xi, xi2)
    assert r.lhs == pytest.approx(math.exp(-2), abs=1e-14) and r.gap < 1e-12
    r = boundary.conformality_check(srw_green, "a", xi, xi2)
    assert r.lhs == pytest.approx(1 / 9, rel=1e-12) and r.gap < 1e-12
    rng = np.random.default_rng(0)
    for _ in range(5):
        g = boundary.random_word(2, rng, 3)
        a, b = boundary.random_ray(2, rng), boundary.random_ray(2, rng)
        if a != b:
            assert boundary.conformality_check(nu_green, g, a, b).gap < 1e-9
    with pytest.raises(ValueError):
        boundary.conformality_check(srw_green, "a", xi, xi)


def test_visual_params_certificate(srw):
    p = VisualParams.green(srw)
    assert math.isinf(p.certified_eps) and p.eps == 1.0
    mu = WalkMeasure(2, {"a": .2, "a'": .2, "b": .1, "b'": .1, "ab": .1, "b'a'": .1, "ab'": .1, "ba'": .1})
    with pytest.raises(UnsupportedModelError):
        VisualParams(0.5, "green", mu)
    with pytest.raises(ValueError):
        VisualParams(0.0)
    with pytest.raises(ValueError):
        VisualParams(5.0, "green", srw, certified_eps=1.0)


def test_measures_report(srw):
    p = VisualParams.green(srw)
    rep = boundary.measures_equal_report(srw, p, 2)
    assert rep.method == "exact" and rep.headline < 1e-9 and len(rep.rows) == 12
    assert rep.to_csv().splitlines()[0] == "cylinder,harmonic,hausdorff,ratio"
    assert rep.to_json()["depth"] == 2
    mc = boundary.measures_equal_report(srw, p, 1, n_walks=5000, seed=1)
    assert mc.method == "mc" and mc.meta["n_walks"] == 5000
