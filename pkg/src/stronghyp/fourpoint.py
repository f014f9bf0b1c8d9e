"""Four-point computations on finite metric spaces.

Every quantity here is a max or min over quadruples. The scans return the
extremal quadruple alongside the value, and re-evaluating that quadruple with
the scalar helpers below reproduces the value bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _config, _kernels
from .spaces import FiniteMetricSpace, _check_index, gromov_product_matrix

Quadruple = tuple  # (x, y, z, t) point indices


class Extremum(NamedTuple):
    value: float
    witness: Quadruple | None


# -- scalar re-evaluation ----------------------------------------------------

def four_point_gap(space: FiniteMetricSpace, x, y, z, t) -> float:
    """Half the gap between the largest and second-largest pair sums."""
    _check_index(space, x, y, z, t)
    return _kernels.quad_gaps(space.dist, x, y, z, t)[0]


def product_defect(space: FiniteMetricSpace, x, y, z, o) -> float:
    """min{(x,z)_o, (y,z)_o} - (x,y)_o."""
    _check_index(space, x, y, z, o)
    D = space.dist

    def g(a, b):
        return 0.5 * (D[a, o] + D[b, o] - D[a, b])

    return min(g(x, z), g(y, z)) - g(x, y)


def quadruple_eps(space: FiniteMetricSpace, x, y, z, t, *, gap_tol=_config.GAP_TOL,
                  tol=_config.EPS_BISECTION_TOL, cap=_config.EPS_BRACKET_CAP) -> float:
    """Largest eps for which this quadruple satisfies the exponential four-point inequality."""
    _check_index(space, x, y, z, t)
    p, q = _kernels.quad_gaps(space.dist, x, y, z, t)
    if p <= gap_tol:
        return math.inf
    return _kernels.crossing(p, q, tol, cap)


# -- chunked scans -----------------------------------------------------------

def _chunks(n: int, parts: int):
    """Split range(n) into contiguous pieces of roughly equal quartic work."""
    parts = max(1, min(parts, n))
    work = np.array([(n - i) ** 3 for i in range(n)], dtype=float)
    cuts = np.searchsorted(np.cumsum(work), np.linspace(0, work.sum(), parts + 1)[1:-1])
    bounds = [0, *sorted(set(int(c) + 1 for c in cuts)), n]
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]


def _run_chunks(fn, n, threads):
    chunks = _chunks(n, threads or 1)
    if len(chunks) == 1:
        return [fn(*chunks[0])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def delta_four_point(space: FiniteMetricSpace, threads: int = 1) -> Extremum:
    """Smallest delta for which the four-point condition holds, with a maximizing quadruple."""
    D = space.dist
    results = _run_chunks(lambda a, b: _kernels.delta_scan(D, a, b), space.n, threads)
    value, w = max(results, key=lambda r: (r[0], tuple(-i for i in r[1])))
    return Extremum(max(value, 0.0), tuple(int(i) for i in w))


def delta_product(space: FiniteMetricSpace) -> Extremum:
    """Smallest delta with (x,y)_o >= min{(x,z)_o, (y,z)_o} - delta for all x, y, z, o."""
    value, w = _kernels.product_delta_scan(space.dist)
    return Extremum(max(value, 0.0), tuple(int(i) for i in w))


def basepoint_delta(space: FiniteMetricSpace, o: int = 0) -> Extremum:
    """Four-point delta restricted to quadruples containing ``o`` (O(n^3)).

    The full four-point delta lies between this value and twice it.
    """
    _check_index(space, o)
    value, w = _kernels.basepoint_delta_scan(space.dist, o)
    return Extremum(max(value, 0.0), tuple(int(i) for i in w))


def eps_star(space: FiniteMetricSpace, *, gap_tol: float = _config.GAP_TOL,
             tol: float = _config.EPS_BISECTION_TOL, cap: float = _config.EPS_BRACKET_CAP,
             threads: int = 1, prescreen: bool = True) -> Extremum:
    """Largest eps such that the space is strongly hyperbolic with every parameter in (0, eps].

    Each quadruple with a nonzero four-point gap p (and second gap q >= p)
    contributes the unique root of ``exp(-eps p) + exp(-eps q) = 1``, located
    by bisection and reported from below. Quadruples whose gap is within
    ``gap_tol`` impose no constraint. The value is ``math.inf`` when no
    quadruple constrains eps (trees, two-point spaces) or every root exceeds
    ``cap``.

    With ``prescreen`` the O(n^3) basepoint bound is tried first: if it
    already forces every gap below ``gap_tol`` the answer is ``inf`` and the
    quartic scan is skipped. The result is identical either way.
    """
    if space.n < 2:
        return Extremum(math.inf, None)
    if prescreen and space.n > 8:
        d0 = basepoint_delta(space, 0).value
        if 2.0 * d0 <= 0.5 * gap_tol:
            return Extremum(math.inf, None)
    D = space.dist
    results = _run_chunks(lambda a, b: _kernels.eps_scan(D, a, b, gap_tol, tol, cap), space.n, threads)
    value, w = min(results, key=lambda r: (r[0], tuple(r[1])))
    if not math.isfinite(value):
        return Extremum(math.inf, None)
    w = tuple(int(i) for i in w)
    return Extremum(quadruple_eps(space, *w, gap_tol=gap_tol, tol=tol, cap=cap), w)


# -- strong hyperbolicity and Ptolemy ---------------------------------------

def _check_eps(eps):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")


def strong_margin(space: FiniteMetricSpace, eps: float) -> Extremum:
    """Worst normalized margin of exp(-eps(x,y)_o) <= exp(-eps(x,z)_o) + exp(-eps(z,y)_o).

    The margin of a quadruple is (RHS - LHS) / LHS, which does not depend on
    the scale of the exponentials; the witness is ordered (x, y, z, o).
    """
    _check_eps(eps)
    value, w = _kernels.strong_margin_scan(space.dist, float(eps))
    return Extremum(value, tuple(int(i) for i in w))


def is_strongly_hyperbolic(space: FiniteMetricSpace, eps: float,
                           tol: float = _config.MARGIN_TOL) -> tuple[bool, Quadruple, float]:
    """Strong hyperbolicity with parameter ``eps``: (verdict, worst quadruple, worst margin)."""
    m = strong_margin(space, eps)
    return m.value >= -tol, m.witness, m.value


def visual_matrix(space: FiniteMetricSpace, eps: float, o: int) -> np.ndarray:
    """d_eps(x, y) = exp(-eps (x,y)_o); positive on the diagonal."""
    _check_eps(eps)
    return np.exp(-eps * gromov_product_matrix(space, o))


def ptolemy_margin(space: FiniteMetricSpace, eps: float, o: int) -> Extremum:
    """Worst normalized margin of Ptolemy's inequality for d_eps based at ``o``."""
    V = visual_matrix(space, eps, o)
    value, w = _kernels.ptolemy_margin_scan(V)
    return Extremum(value, tuple(int(i) for i in w))


def is_ptolemaic_visual(space: FiniteMetricSpace, eps: float, o: int,
                        tol: float = _config.MARGIN_TOL) -> bool:
    return ptolemy_margin(space, eps, o).value >= -tol


# -- defect samples and (EB) -------------------------------------------------

@dataclass(frozen=True)
class DefectSample:
    A: float
    B: float


def defect_arrays(space: FiniteMetricSpace):
    """A and B for every ordered quadruple, in lexicographic order.

    Returns ``(A, B)`` arrays of shape ``(n, n, n, n)`` indexed by (x, y, z, t).
    """
    D = space.dist
    xy_zt = D[:, :, None, None] + D[None, None, :, :]
    xz_yt = D[:, None, :, None] + D[None, :, None, :]
    # xt_zy[x,y,z,t] = D[x,t] + D[z,y]
    xt_zy = D[:, None, None, :] + D.T[None, :, :, None]
    return 0.5 * (xy_zt - xz_yt), 0.5 * (xy_zt - xt_zy)


def defect_statistics(space: FiniteMetricSpace) -> list[DefectSample]:
    A, B = defect_arrays(space)
    return [DefectSample(float(a), float(b)) for a, b in zip(A.ravel(), B.ravel())]


def check_EB(space: FiniteMetricSpace, L: float, lam: float, R0: float,
             tol: float = _config.MARGIN_TOL):
    """Exponential strong bolicity: ``|2B| <= L exp(-lam 2A)`` whenever ``2A >= R0``.

    Returns ``(ok, violations)`` where each violation is ``(quadruple, A, B)``.
    """
    if not (L > 0 and lam > 0 and R0 > 0):
        raise ValueError("L, lambda and R0 must be positive")
    A, B = defect_arrays(space)
    active = 2.0 * A >= R0
    bad = active & (np.abs(2.0 * B) > L * np.exp(-lam * 2.0 * A) + tol)
    violations = [(tuple(int(i) for i in q), float(A[tuple(q)]), float(B[tuple(q)]))
                  for q in np.argwhere(bad)]
    return not violations, violations


def check_strong_bolicity(space: FiniteMetricSpace, eta: float, r: float, R: float,
                          tol: float = _config.MARGIN_TOL):
    """Lafforgue's condition at scale (eta, r, R).

    Every ordered quadruple with ``|x,y|+|z,t| <= r`` and ``|x,z|+|y,t| >= R``
    must satisfy ``|x,t|+|y,z| <= |x,z|+|y,t| + eta``. Returns
    ``(ok, violating quadruples)``.
    """
    D = space.dist
    xy_zt = D[:, :, None, None] + D[None, None, :, :]
    xz_yt = D[:, None, :, None] + D[None, :, None, :]
    xt_yz = D[:, None, None, :] + D.T[None, :, :, None]
    bad = (xy_zt <= r) & (xz_yt >= R) & (xt_yz > xz_yt + eta + tol)
    viol = [tuple(int(i) for i in q) for q in np.argwhere(bad)]
    return not viol, viol


# -- report ------------------------------------------------------------------

@dataclass
class HyperbolicityReport:
    """delta, eps*, and the Ptolemy verdict at eps*, with witness quadruples."""

    n: int
    delta: float
    eps_star: float
    ptolemaic_at_eps: bool | None
    witnesses: dict = field(default_factory=dict)
    delta_exact: bool = True
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "delta": self.delta,
            "delta_exact": self.delta_exact,
            "eps_star": "inf" if math.isinf(self.eps_star) else self.eps_star,
            "log2_over_eps_star": 0.0 if math.isinf(self.eps_star) else math.log(2) / self.eps_star,
            "ptolemaic_at_eps": self.ptolemaic_at_eps,
            "witnesses": {k: (list(v) if v is not None else None) for k, v in self.witnesses.items()},
            "config": self.config,
        }


def analyze(space: FiniteMetricSpace, *, threads: int = 1, quartic_cap: int = 600,
            ptolemy_cap: int = 80) -> HyperbolicityReport:
    """Full four-point report.

    For spaces with more than ``quartic_cap`` points the exact delta scan is
    replaced by the basepoint bound (reported with ``delta_exact=False``);
    eps* is still exact whenever the basepoint bound certifies a tree-like
    space, and computed by the full scan otherwise.
    """
    witnesses = {}
    if space.n <= quartic_cap:
        d = delta_four_point(space, threads=threads)
        delta, exact = d.value, True
        witnesses["delta"] = d.witness
    else:
        b = basepoint_delta(space, 0)
        delta, exact = 2.0 * b.value, False
        witnesses["delta_basepoint"] = b.witness
    e = eps_star(space, threads=threads)
    witnesses["eps_star"] = e.witness
    ptol = None
    if space.n <= ptolemy_cap:
        ptol = is_ptolemaic_visual(space, e.value if math.isfinite(e.value) else 1.0, 0)
    return HyperbolicityReport(
        n=space.n, delta=delta, eps_star=e.value, ptolemaic_at_eps=ptol, witnesses=witnesses,
        delta_exact=exact,
        config={k: getattr(_config, k) for k in ("MARGIN_TOL", "METRIC_TOL", "GAP_TOL",
                                                  "EPS_BISECTION_TOL", "EPS_BRACKET_CAP")},
    )
