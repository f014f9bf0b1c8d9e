"""Acceptance suite: every criterion at its stated tolerance and time budget.

Each test records a single pass/fail line; the lines are repeated together
in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from stronghyp import boundary, fourpoint, green, h2
from stronghyp.boundary import Cylinder, VisualParams
from stronghyp.constants import eb_constants_from_strong, eps_from_EB, strong_bolicity_R
from stronghyp.freegroup import parse_word
from stronghyp.spaces import FiniteMetricSpace
from stronghyp.walks import green_mc, hitting_probability_mc

LOG2 = math.log(2)
LOG3 = math.log(3)

pytestmark = pytest.mark.slow


def test_criterion_01_h2_margins(criterion):
    t0 = time.perf_counter()
    q = h2.sample_h2_quadruples((-10, 10, 0, 10), 100_000, seed=0)
    m = h2.margins(q).min()
    dt = time.perf_counter() - t0
    ok = m >= -1e-9 and dt < 5
    criterion(1, ok, f"min four-point margin {m:.4g} over 1e5 quadruples ({dt:.2f} s)")
    assert ok


def test_criterion_02_optimal_delta(criterion):
    t0 = time.perf_counter()
    d = h2.boundary_defect(1e-2)
    di = h2.interior_defect(1e-2, 1e-6)
    q = h2.sample_h2_quadruples((-10, 10, 0, 10), 100_000, seed=1)
    smax = h2.h2_delta_defect(q[:, 0], q[:, 1], q[:, 2], q[:, 3]).max()
    dt = time.perf_counter() - t0
    ok = abs(d - LOG2) <= 1e-3 and abs(di - LOG2) <= 1e-3 and smax <= LOG2 + 1e-9 and dt < 5
    criterion(2, ok, f"defect(1e-2) = {d:.6f} (interior {di:.6f}), log 2 = {LOG2:.6f}; "
                     f"max sampled defect {smax:.4f} ({dt:.2f} s)")
    assert ok


def test_criterion_03_delta_bound_corpus(corpus, criterion):
    t0 = time.perf_counter()
    assert len(corpus) >= 200 and max(len(D) for _, D in corpus) <= 12
    bad_bound, bad_eq = [], []
    for i, (_, D) in enumerate(corpus):
        s = FiniteMetricSpace(D)
        d = fourpoint.delta_four_point(s).value
        e = fourpoint.eps_star(s).value
        if math.isfinite(e) and d > LOG2 / e + 1e-9:
            bad_bound.append(i)
        if d != fourpoint.delta_product(s).value:
            bad_eq.append(i)
    dt = time.perf_counter() - t0
    ok = not bad_bound and not bad_eq and dt < 30
    criterion(3, ok, f"{len(corpus)} spaces: bound violations {len(bad_bound)}, "
                     f"four-point != product {len(bad_eq)} ({dt:.2f} s)")
    assert ok


def test_criterion_04_ptolemy_equivalence(corpus, criterion):
    t0 = time.perf_counter()
    mismatches = checks = 0
    for _, D in corpus:
        s = FiniteMetricSpace(D)
        e = fourpoint.eps_star(s).value
        base = e if math.isfinite(e) else 1.0  # no critical parameter for tree-like spaces
        for eps in (0.5 * base, base, 2.0 * base):
            sh = fourpoint.is_strongly_hyperbolic(s, eps)[0]
            for o in range(s.n):
                checks += 1
                mismatches += fourpoint.is_ptolemaic_visual(s, eps, o) != sh
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 60
    criterion(4, ok, f"{checks} (space, basepoint, eps) checks, {mismatches} mismatches ({dt:.2f} s)")
    assert ok


def test_criterion_05_srw_green(srw, criterion):
    t0 = time.perf_counter()
    t = green.green_function_truncated(srw, 14)
    F, G = t.F("a"), t.G_ee
    hit = hitting_probability_mc(srw, "e", "a", 1_000_000, seed=0)
    vis = green_mc(srw, "e", "e", 1_000_000, seed=0)
    short = slice(0, int(t.ball.offsets[5]))  # every word of length <= 4
    worst_len = float(np.max(np.abs(t.green_length()[short] - t.ball.length[short] * LOG3)))
    dt = time.perf_counter() - t0
    ok = (abs(F - 1 / 3) <= 1e-3 and abs(G - 1.5) <= 1e-3 and hit.agrees(F, 4) and vis.agrees(G, 4)
          and worst_len <= 5e-3 and dt < 120)
    criterion(5, ok, f"F(e,a) = {F:.6f}, G(e,e) = {G:.6f}; MC {hit.value:.5f}+-{hit.stderr:.5f}, "
                     f"{vis.value:.5f}+-{vis.stderr:.5f}; max | |e,w|_G - |w| log 3 | = {worst_len:.2e} ({dt:.1f} s)")
    assert ok


def test_criterion_06_ancona_decay(nonuniform, criterion):
    t0 = time.perf_counter()
    t = green.green_function_truncated(nonuniform, 14)
    medians = {}
    for R in range(1, 6):
        scan = green.ancona_ratio_scan(t, green.separated_quadruples(2, R, 200, seed=R, max_arm=2))
        medians[R] = scan.medians[R]
    slope = green.median_slope(medians)
    dt = time.perf_counter() - t0
    ok = bool(slope < -0.1) and dt < 180
    med = ", ".join(f"{m:.1e}" for m in medians.values())
    criterion(6, ok, f"0.35/0.15 walk: median defects [{med}], slope {slope:.3g} ({dt:.1f} s)")
    assert ok, ("nearest-neighbour Green functions factorize through the bridge, so every defect is "
                "zero up to rounding and truncation; see the decisions ledger")


def test_criterion_07_green_ball(srw, nonuniform, criterion):
    t0 = time.perf_counter()
    metric = green.green_metric_ball(nonuniform, 6)
    space = metric.to_space()  # raises unless the table is a valid metric
    rep = green.eb_check_green(metric)
    again = fourpoint.basepoint_delta(space, 0)
    reproducible = tuple(rep.delta_witness) == again.witness and rep.delta == 2 * again.value
    srw_rep = green.eb_check_green(green.green_metric_ball(srw, 6))
    dt = time.perf_counter() - t0
    ok = rep.eps_star > 0 and reproducible and math.isinf(srw_rep.eps_star) and dt < 180
    criterion(7, ok, f"{space.n} points validated; eps* = {rep.eps_star}, delta <= {rep.delta:.2e} "
                     f"witness {rep.delta_witness}; SRW eps* = {srw_rep.eps_star} ({dt:.1f} s)")
    assert ok


def test_criterion_08_srw_cylinders(srw, criterion):
    t0 = time.perf_counter()
    cyls = boundary.cylinders_at_depth(2, 2)
    params = VisualParams.green(srw)
    exact = [boundary.harmonic_measure_exact(srw, c).value for c in cyls]
    haus = [boundary.hausdorff_cylinder_measure(params, 2, c).estimate.value for c in cyls]
    mc = boundary.harmonic_measure_mc(srw, cyls, 100_000, seed=0)
    z = max(abs(m.value - 1 / 12) / m.stderr for m in mc)
    dt = time.perf_counter() - t0
    ok = (all(abs(v - 1 / 12) <= 1e-15 for v in exact) and all(abs(h - 1 / 12) <= 1e-2 for h in haus)
          and z <= 3 and dt < 120)
    criterion(8, ok, f"12 cylinders: exact 1/12, Hausdorff max err {max(abs(h - 1 / 12) for h in haus):.1e}, "
                     f"MC max |z| {z:.2f} ({dt:.1f} s)")
    assert ok


def test_criterion_09_conformality(nonuniform, criterion):
    t0 = time.perf_counter()
    params = VisualParams.green(nonuniform)
    rng = np.random.default_rng(0)
    gaps = []
    while len(gaps) < 20:
        g = boundary.random_word(2, rng, int(rng.integers(1, 5)))
        xi, xi2 = boundary.random_ray(2, rng), boundary.random_ray(2, rng)
        if xi != xi2:
            gaps.append(boundary.conformality_check(params, g, xi, xi2, depth=30).gap)
    rn = [boundary.radon_nikodym_check(nonuniform, "ab", Cylinder.parse("b'"), d, params) for d in (1, 2)]
    dt = time.perf_counter() - t0
    ok = max(gaps) <= 1e-3 and rn[1].gap < rn[0].gap and dt < 60
    criterion(9, ok, f"max conformality gap {max(gaps):.1e} over 20 triples; Radon-Nikodym gap "
                     f"{rn[0].gap:.2e} -> {rn[1].gap:.2e} ({dt:.2f} s)")
    assert ok


def test_criterion_10_constants(criterion):
    a = eps_from_EB(4, 1, 0.5, 4)
    b = strong_bolicity_R(1, 1, 2)
    c = eb_constants_from_strong(1, A0=1)
    ok = a == 2 * LOG2 / 4 and abs(b - (2 - 2 * math.log(math.exp(0.5) - 1))) <= 1e-12 and c == (4, 0.5, 2)
    criterion(10, ok, f"eps_from_EB = {a!r}, R = {b!r}, (L, lam, R0) = {c}")
    assert ok
