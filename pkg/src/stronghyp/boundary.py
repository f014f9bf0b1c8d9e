"""The boundary of F_k: rays, cylinders, visual metrics and the harmonic measure.

Boundary points are eventually periodic rays ``prefix (period)^infinity``.
Visual quantities are evaluated at basepoint ``e`` through finite ray
approximants, for either the word metric or the Green metric of a walk.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _config
from .errors import ConvergenceError, InvariantViolation, UnsupportedModelError
from .freegroup import (Ball, WalkMeasure, _as_letters, common_prefix_length, format_word, inverse,
                        multiply, parse_word)
from .walks import MeasureEstimate, simulate_exits


# -- rays and cylinders ------------------------------------------------------

def _primitive(period: tuple) -> tuple:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True)
class Ray:
    """The infinite reduced word ``prefix period period ...``.

    Stored in canonical form (shortest prefix, primitive period), so equal
    rays compare and hash equal.
    """

    prefix: tuple
    period: tuple

    def __post_init__(self):
        prefix = tuple(int(c) for c in self.prefix)
        period = tuple(int(c) for c in self.period)
        if not period:
            raise ValueError("a ray needs a nonempty period")
        if multiply(period) != period or period[-1] == period[0] ^ 1:
            raise ValueError(f"period {format_word(period)} is not cyclically reduced")
        if multiply(prefix) != prefix or (prefix and prefix[-1] == period[0] ^ 1):
            raise ValueError(f"{format_word(prefix)}({format_word(period)}) is not reduced")
        period = _primitive(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def parse(cls, text: str) -> "Ray":
        """``"ab(a'b)"`` is ``ab`` followed by ``a'b`` repeated forever."""
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise ValueError(f"ray {text!r} must end with a parenthesised period")
        head, per = text[:-1].split("(", 1)
        return cls(parse_word(head) if head else (), parse_word(per))

    def letters(self, n: int) -> tuple:
        """The first ``n`` letters."""
        out = list(self.prefix[:n])
        while len(out) < n:
            out.extend(self.period)
        return tuple(out[:n])

    def translate(self, g) -> "Ray":
        """``g`` applied to the ray (left multiplication with reduction)."""
        g = _as_letters(g)
        m = len(g) // len(self.period) + 2
        w = multiply(g, self.prefix, self.period * m)
        return Ray(w, self.period)

    def __str__(self):
        head = format_word(self.prefix) if self.prefix else ""
        return f"{head}({format_word(self.period)})"


@dataclass(frozen=True)
class Cylinder:
    """All rays extending a nonempty reduced prefix."""

    prefix: tuple

    def __post_init__(self):
        p = tuple(int(c) for c in self.prefix)
        if not p:
            raise ValueError("a cylinder needs a nonempty prefix")
        if multiply(p) != p:
            raise ValueError(f"cylinder prefix {format_word(p)} is not reduced")
        object.__setattr__(self, "prefix", p)

    @classmethod
    def parse(cls, text: str) -> "Cylinder":
        return cls(parse_word(text))

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def contains(self, ray: Ray) -> bool:
        return ray.letters(self.depth) == self.prefix

    def representative(self) -> Ray:
        """A ray in the cylinder: the prefix followed by a repeated letter."""
        last = self.prefix[-1]
        c = 0 if last != 1 else 2  # any letter other than last^-1
        c = c if c != last ^ 1 else c + 2
        return Ray(self.prefix, (c,))

    def children(self, k: int) -> list["Cylinder"]:
        last = self.prefix[-1]
        return [Cylinder(self.prefix + (c,)) for c in range(2 * k) if c != last ^ 1]

    def __str__(self):
        return format_word(self.prefix)


def cylinders_at_depth(k: int, depth: int) -> list[Cylinder]:
    """All depth-``depth`` cylinders in length-lex order."""
    if depth < 1:
        raise ValueError("depth must be positive")
    ball = Ball(k, depth)
    sl = ball.sphere(depth)
    return [Cylinder(ball.word(i)) for i in range(sl.start, sl.stop)]


# -- visual parameters -------------------------------------------------------

@dataclass
class VisualParams:
    """Visual metric ``exp(-eps (.,.)_e)`` for the word metric or a Green metric.

    For nearest-neighbour walks the Green length ``-log F(e, w)`` is the exact
    sum of per-letter terms; for other walks it is read from a solved
    :class:`~stronghyp.green.GreenTable`, which bounds the usable depth.
    """

    eps: float
    metric_kind: str = "word"
    mu: WalkMeasure | None = None
    table: object = None
    certified_eps: float | None = None
    _letter_len: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.metric_kind not in ("word", "green"):
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        if self.metric_kind == "green":
            if self.mu is None:
                raise ValueError("a Green visual metric needs a walk measure")
            if self.mu.nearest_neighbour:
                from .green import nn_first_passage

                self._letter_len = -np.log(nn_first_passage(self.mu))
            elif self.table is None:
                raise UnsupportedModelError(
                    "Green lengths of non-nearest-neighbour walks need a solved GreenTable")
        if self.certified_eps is not None and self.eps > self.certified_eps + _config.MARGIN_TOL:
            raise ValueError(f"eps={self.eps} exceeds the certified parameter {self.certified_eps}")

    @classmethod
    def word(cls, k: int, eps: float = 1.0) -> "VisualParams":
        return cls(eps, "word")

    @classmethod
    def green(cls, mu: WalkMeasure, eps: float | None = None, *, certify_radius: int = 3,
              table=None) -> "VisualParams":
        """Green visual parameters, certified on a finite Green ball.

        The certificate is ``eps_star`` of the killed-chain Green metric on the
        ball of ``certify_radius``; the default ``eps`` is half of it, capped at 1.
        """
        from . import fourpoint
        from .green import green_metric_ball

        cert = fourpoint.eps_star(green_metric_ball(mu, certify_radius).to_space()).value
        if eps is None:
            eps = min(1.0, 0.5 * cert)
        return cls(eps, "green", mu, table, certified_eps=cert)

    @property
    def dimension(self) -> float:
        """Hausdorff dimension of the boundary for this visual metric."""
        if self.metric_kind == "word":
            raise ValueError("use word_dimension(k) for the word metric")
        return 1.0 / self.eps

    def word_dimension(self, k: int) -> float:
        return math.log(2 * k - 1) / self.eps

    def length(self, w) -> float:
        """``|e, w|`` in the chosen metric."""
        w = _as_letters(w)
        if self.metric_kind == "word":
            return float(len(w))
        if self._letter_len is not None:
            return float(sum(self._letter_len[c] for c in w))
        return float(self.table.green_length()[self.table.index(w)])

    def dist(self, x, y) -> float:
        return self.length(multiply(inverse(_as_letters(x)), _as_letters(y)))

    def gromov(self, x, y, o=()) -> float:
        return 0.5 * (self.dist(x, o) + self.dist(y, o) - self.dist(x, y))

    @property
    def max_depth(self) -> int:
        if self.metric_kind == "green" and self._letter_len is None:
            return self.table.radius // 2
        return _config.HAUSDORFF_DEPTH_CAP


# -- Gromov products and Busemann functions ----------------------------------

def boundary_gromov_product(xi: Ray, xi2: Ray, params: VisualParams, *, tol: float = 1e-6,
                            start_depth: int | None = None) -> float:
    """``(xi, xi2)_e`` as the limit of products of ray approximants.

    Converged once two consecutive depths differ by less than ``tol``; raises
    ``ValueError`` for identical rays and ``ConvergenceError`` at the depth cap.
    """
    if xi == xi2:
        raise ValueError("the Gromov product of a ray with itself is infinite")
    if params.metric_kind == "word":
        return float(common_prefix_length(xi.letters(_config.HAUSDORFF_DEPTH_CAP),
                                          xi2.letters(_config.HAUSDORFF_DEPTH_CAP)))
    n = start_depth or common_prefix_length(xi.letters(200), xi2.letters(200)) + 2
    prev = None
    while n <= params.max_depth:
        val = params.gromov(xi.letters(n), xi2.letters(n))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n += 1
    raise ConvergenceError(f"Gromov product of {xi} and {xi2} not converged by depth {params.max_depth}")


def busemann_at(params: VisualParams, y, z, xi: Ray, depth: int) -> float:
    """``|x, y| - |x, z|`` for the depth-``depth`` approximant ``x`` of ``xi``."""
    x = xi.letters(depth)
    return params.dist(x, y) - params.dist(x, z)


def busemann(params: VisualParams, y, z, xi: Ray, depth: int | None = None, *,
             tol: float = _config.BUSEMANN_TOL) -> float:
    """Busemann function ``beta(y, z; xi) = 2 (xi, z)_y - |y, z| = lim |x, y| - |x, z|``.

    Starts at ``depth`` (at least ``|y| + |z| + 2``) and deepens until two
    consecutive approximants agree within ``tol``.
    """
    y, z = _as_letters(y), _as_letters(z)
    lo = len(y) + len(z) + 2
    if depth is None:
        depth = lo
    if depth < lo:
        raise ValueError(f"depth must be at least |y| + |z| + 2 = {lo}")
    prev = busemann_at(params, y, z, xi, depth)
    d = depth + 1
    while d <= params.max_depth:
        cur = busemann_at(params, y, z, xi, d)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
        d += 1
    raise ConvergenceError(f"Busemann function not converged by depth {params.max_depth}")


def visual_distance(xi: Ray, xi2: Ray, params: VisualParams) -> float:
    if xi == xi2:
        return 0.0
    return math.exp(-params.eps * boundary_gromov_product(xi, xi2, params))


# -- harmonic measure --------------------------------------------------------

def harmonic_measure_exact(mu: WalkMeasure, cylinder) -> MeasureEstimate:
    """Exact ``nu([w]) = F(e, w) / (1 + F(e, s))`` with ``s`` the last letter of ``w``.

    From ``w`` the walk ends inside the subtree of ``w`` with probability
    ``1 / (1 + F(e, s))``, by first-step analysis through the parent of ``w``.
    """
    from .green import nn_first_passage

    if not mu.nearest_neighbour:
        raise UnsupportedModelError("exact harmonic measure needs a nearest-neighbour walk")
    w = cylinder.prefix if isinstance(cylinder, Cylinder) else Cylinder(_as_letters(cylinder)).prefix
    F = nn_first_passage(mu)
    val = float(np.prod(F[list(w)])) / (1.0 + F[w[-1]])
    return MeasureEstimate(float(val), 0.0, 0)


def harmonic_measure_mc(mu: WalkMeasure, cylinders: Sequence, n_walks: int,
                        stabilization_depth: int | None = None, seed: int = 0,
                        patience: int = _config.HARMONIC_PATIENCE,
                        max_failure_rate: float = 1e-3) -> list[MeasureEstimate]:
    """Monte Carlo harmonic measure of cylinders from stabilized walk prefixes.

    ``stabilization_depth`` defaults to the deepest cylinder plus 4. Walks that
    fail to stabilize are excluded; more than ``max_failure_rate`` of them is an
    error.
    """
    cyl = [c if isinstance(c, Cylinder) else Cylinder(_as_letters(c)) for c in cylinders]
    need = max(c.depth for c in cyl) + 4
    depth = need if stabilization_depth is None else stabilization_depth
    if depth < need:
        raise ValueError(f"stabilization depth must be at least {need}")
    sample = simulate_exits(mu, n_walks, depth, seed, patience)
    if sample.failures > max_failure_rate * n_walks:
        raise InvariantViolation(f"{sample.failures} of {n_walks} walks failed to stabilize")
    return [sample.fraction(c.prefix) for c in cyl]


def pushforward_measure(mu: WalkMeasure, g, cylinder: Cylinder) -> float:
    """Exact ``nu(g . [w])`` for a nearest-neighbour walk.

    ``g [w]`` is the cylinder ``[g w]`` unless ``g`` cancels all of ``w``; then
    it is the complement of ``h [s^-1]`` with ``h = g w`` and ``s`` the last letter of ``w``.
    """
    g = _as_letters(g)
    w = cylinder.prefix
    h = multiply(g, w)
    cancel = (len(g) + len(w) - len(h)) // 2
    if cancel < len(w):
        return harmonic_measure_exact(mu, Cylinder(h)).value
    return 1.0 - pushforward_measure(mu, h, Cylinder((w[-1] ^ 1,)))


# -- Hausdorff measure -------------------------------------------------------

def _cover_weights(params: VisualParams, k: int) -> np.ndarray:
    """``diam([v s]) ** D / diam([v]) ** D`` for each appended letter ``s``.

    For the word metric this is ``(2k - 1) ** -1``; for a nearest-neighbour
    Green metric with ``D = 1/eps`` it is ``F(e, s)``.
    """
    if params.metric_kind == "word":
        return np.full(2 * k, 1.0 / (2 * k - 1))
    if params._letter_len is None:
        raise UnsupportedModelError("Hausdorff measures need the word metric or a nearest-neighbour Green metric")
    return np.exp(-params._letter_len * params.eps * params.dimension)


@dataclass
class HausdorffResult:
    estimate: MeasureEstimate
    depths: list
    values: list
    converged: bool


def hausdorff_cylinder_measure(params: VisualParams, k: int, cylinder, *,
                               tol: float = _config.HAUSDORFF_TOL,
                               depth_cap: int = _config.HAUSDORFF_DEPTH_CAP,
                               strict: bool = True) -> HausdorffResult:
    """Normalized Hausdorff measure of a cylinder from covering sums.

    At cover depth ``n`` the value is ``sum diam([v])^D`` over depth-``n``
    cylinders inside the target, divided by the same sum over all of them, with
    ``D`` the Hausdorff dimension. Sums are propagated over last letters. The
    sequence is extended until successive values agree within ``tol``.
    """
    cyl = cylinder if isinstance(cylinder, Cylinder) else Cylinder(_as_letters(cylinder))
    if params.metric_kind == "green" and params.mu is not None and params.mu.rank != k:
        raise ValueError("rank mismatch between walk and group")
    step = _cover_weights(params, k)
    nl = 2 * k
    M = np.array([[step[t] if t != s ^ 1 else 0.0 for t in range(nl)] for s in range(nl)])
    w = cyl.prefix
    inside = np.zeros(nl)
    inside[w[-1]] = float(np.prod(step[list(w)]))
    total = step.copy()
    for _ in range(len(w) - 1):
        total = total @ M
    depths, values = [], []
    prev = None
    for n in range(len(w), depth_cap + 1):
        val = float(inside.sum() / total.sum())
        depths.append(n)
        values.append(val)
        if prev is not None and abs(val - prev) <= tol:
            return HausdorffResult(MeasureEstimate(val, 0.0, 0), depths, values, True)
        prev = val
        inside = inside @ M
        total = total @ M
        # rescale to avoid underflow; only ratios matter
        s = total.sum()
        inside /= s
        total /= s
    if strict:
        raise ConvergenceError(f"covering sums for [{cyl}] not converged by depth {depth_cap}: "
                               f"last values {values[-3:]}")
    return HausdorffResult(MeasureEstimate(values[-1], abs(values[-1] - values[-2]), 0), depths, values, False)


# -- conformality ------------------------------------------------------------

@dataclass(frozen=True)
class ConformalityResult:
    lhs: float
    rhs: float
    gap: float


def conformality_check(params: VisualParams, g, xi: Ray, xi2: Ray, depth: int = 30) -> ConformalityResult:
    """Compare ``d_eps(g xi, g xi2)^2`` with ``exp(eps b(xi)) exp(eps b(xi2)) d_eps(xi, xi2)^2``.

    Here ``b(xi) = beta(e, g^-1; xi)``; every quantity is evaluated at the
    depth-``depth`` ray approximants, and ``gap`` is relative to the larger side.
    """
    g = _as_letters(g)
    if xi == xi2:
        raise ValueError("rays must be distinct")
    eps = params.eps
    gx, gx2 = xi.translate(g), xi2.translate(g)
    ginv = inverse(g)
    lhs = math.exp(-2.0 * eps * params.gromov(gx.letters(depth), gx2.letters(depth)))
    b1 = busemann_at(params, (), ginv, xi, depth)
    b2 = busemann_at(params, (), ginv, xi2, depth)
    rhs = math.exp(eps * b1) * math.exp(eps * b2) * math.exp(-2.0 * eps * params.gromov(xi.letters(depth),
                                                                                      xi2.letters(depth)))
    gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return ConformalityResult(lhs, rhs, gap)


def random_ray(k: int, rng: np.random.Generator, prefix_len: int = 6, period_len: int = 3) -> Ray:
    """A random eventually periodic ray (for seeded spot checks)."""
    nl = 2 * k
    while True:
        w = [int(rng.integers(nl))]
        while len(w) < prefix_len + period_len:
            c = int(rng.integers(nl))
            if c != w[-1] ^ 1:
                w.append(c)
        period = tuple(w[prefix_len:])
        if period[-1] != period[0] ^ 1 and w[prefix_len - 1] != period[0] ^ 1:
            return Ray(tuple(w[:prefix_len]), period)


def random_word(k: int, rng: np.random.Generator, length: int) -> tuple:
    nl = 2 * k
    w: list[int] = []
    while len(w) < length:
        c = int(rng.integers(nl))
        if not w or c != w[-1] ^ 1:
            w.append(c)
    return tuple(w)


# -- Radon-Nikodym -----------------------------------------------------------

@dataclass
class RadonNikodymResult:
    """``ratio = nu(g P) / nu(P)`` against the nu-average of ``exp beta(e, g^-1; xi)`` over ``P``.

    ``integral`` samples the density once per depth-``depth`` sub-cylinder at a
    representative ray; ``piece_gap`` is the largest per-piece discrepancy.
    """

    ratio: float
    integral: float
    gap: float
    piece_gap: float
    depth: int


def radon_nikodym_check(mu: WalkMeasure, g, cylinder, depth: int,
                        params: VisualParams | None = None) -> RadonNikodymResult:
    """Test ``nu(g A) = integral over A of exp beta_G(e, g^-1; xi) d nu(xi)`` on a cylinder.

    Needs a nearest-neighbour walk, for which both sides are exact.
    """
    if not mu.nearest_neighbour:
        raise UnsupportedModelError("exact Radon-Nikodym checks need a nearest-neighbour walk")
    cyl = cylinder if isinstance(cylinder, Cylinder) else Cylinder(_as_letters(cylinder))
    if depth < cyl.depth:
        raise ValueError("refinement depth must be at least the cylinder depth")
    params = params or VisualParams(1.0, "green", mu)
    g = _as_letters(g)
    ginv = inverse(g)
    pieces = [cyl]
    for _ in range(depth - cyl.depth):
        pieces = [c for p in pieces for c in p.children(mu.rank)]
    nuP = harmonic_measure_exact(mu, cyl).value
    ratio = pushforward_measure(mu, g, cyl) / nuP
    integral = 0.0
    piece_gap = 0.0
    probe = depth + len(g) + 2
    for Q in pieces:
        nuQ = harmonic_measure_exact(mu, Q).value
        dens = math.exp(busemann_at(params, (), ginv, Q.representative(), probe))
        integral += nuQ * dens
        piece_gap = max(piece_gap, abs(pushforward_measure(mu, g, Q) / nuQ - dens))
    integral /= nuP
    return RadonNikodymResult(float(ratio), float(integral), float(abs(ratio - integral)), float(piece_gap), depth)


# -- harmonic versus Hausdorff -----------------------------------------------

@dataclass
class MeasuresReport:
    rows: list  # (cylinder, harmonic MeasureEstimate, hausdorff value, ratio)
    depth: int
    headline: float
    method: str
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cylinder", "harmonic", "hausdorff", "ratio"])
        for c, h, d, r in self.rows:
            w.writerow([str(c), repr(float(h.value)), repr(float(d)), repr(float(r))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "depth": self.depth, "method": self.method, "max_abs_ratio_minus_1": self.headline,
            "rows": [{"cylinder": str(c), "harmonic": h.to_dict(), "hausdorff": d, "ratio": r}
                     for c, h, d, r in self.rows],
            **self.meta,
        }


def measures_equal_report(mu: WalkMeasure, params: VisualParams, depth: int, *,
                          n_walks: int = 0, seed: int = 0) -> MeasuresReport:
    """Harmonic measure against normalized Hausdorff measure on every depth-``depth`` cylinder.

    The harmonic column is exact for nearest-neighbour walks unless
    ``n_walks > 0`` requests Monte Carlo.
    """
    if params.metric_kind != "green" or params.mu is None or params.mu != mu:
        raise ValueError("the visual parameters must use the Green metric of the same walk")
    cyls = cylinders_at_depth(mu.rank, depth)
    if n_walks > 0 or not mu.nearest_neighbour:
        if n_walks <= 0:
            raise UnsupportedModelError("non-nearest-neighbour walks need Monte Carlo (n_walks > 0)")
        harm = harmonic_measure_mc(mu, cyls, n_walks, seed=seed)
        method = "mc"
    else:
        harm = [harmonic_measure_exact(mu, c) for c in cyls]
        method = "exact"
    rows = []
    for c, h in zip(cyls, harm):
        hd = hausdorff_cylinder_measure(params, mu.rank, c).estimate.value
        rows.append((c, h, float(hd), float(h.value / hd)))
    headline = max(abs(r[3] - 1.0) for r in rows)
    return MeasuresReport(rows, depth, headline, method, {"eps": params.eps, "n_walks": n_walks, "seed": seed})
