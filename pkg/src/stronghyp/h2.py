"""The upper half-plane model of the hyperbolic plane.

Points are handled as complex numbers ``x + iy`` with ``y > 0``; every function
accepts :class:`HPoint` instances, Python complex numbers or numpy complex
arrays (broadcasting elementwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _config

LOG2 = math.log(2.0)

# heights used for interior approximants of boundary points
APPROXIMANT_HEIGHTS = (1e-3, 1e-4, 1e-5, 1e-6)


@dataclass(frozen=True)
class HPoint:
    """A point ``x + iy`` of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")
        if not self.y > 0:
            raise ValueError(f"HPoint needs y > 0, got y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, w: complex) -> "HPoint":
        return cls(w.real, w.imag)


@dataclass(frozen=True)
class RBoundaryPoint:
    """A finite real point of the boundary line (the point at infinity is excluded)."""

    a: float

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ValueError("boundary point must be a finite real")


def _z(w):
    if isinstance(w, HPoint):
        return w.z
    if isinstance(w, RBoundaryPoint):
        return complex(w.a, 0.0)
    return w


def _check_upper(*ws):
    for w in ws:
        if np.any(np.imag(w) <= 0):
            raise ValueError("points must lie in the upper half-plane (y > 0)")


def pair_norm(w1, w2):
    """``|w1 - w2| + |w1 - conj(w2)|``."""
    w1, w2 = _z(w1), _z(w2)
    return np.abs(w1 - w2) + np.abs(w1 - np.conj(w2))


def _arccosh_dist(w1, w2):
    x = np.abs(w1 - w2) ** 2 / (2.0 * np.imag(w1) * np.imag(w2))
    # arccosh(1 + x) written so that small distances keep full precision
    return np.log1p(x + np.sqrt(x * (x + 2.0)))


def h2_dist(w1, w2, check: bool = False):
    """Hyperbolic distance ``2 log(pair_norm / (2 sqrt(y1 y2)))``.

    Parameters
    ----------
    w1, w2 : HPoint, complex or complex ndarray
    check : bool
        Cross-check against the arccosh closed form wherever the distance is
        below ``H2_CROSSCHECK_MAX_DIST``; raises ``ArithmeticError`` if the two
        disagree by more than 1e-12 relatively (with an absolute floor of 1e-12).
    """
    w1, w2 = _z(w1), _z(w2)
    _check_upper(w1, w2)
    ratio = pair_norm(w1, w2) / (2.0 * np.sqrt(np.imag(w1)) * np.sqrt(np.imag(w2)))
    d = np.maximum(2.0 * np.log(ratio), 0.0)
    if check:
        alt = _arccosh_dist(w1, w2)
        near = d < _config.H2_CROSSCHECK_MAX_DIST
        err = np.abs(d - alt)
        bad = near & (err > 1e-12 * np.maximum(np.abs(alt), 1.0))
        if np.any(bad):
            raise ArithmeticError(f"distance forms disagree by {np.max(err[bad]):.3e}")
    return d if np.ndim(d) else float(d)


def h2_gromov_product(w1, w2, o):
    """``(w1, w2)_o`` for the hyperbolic distance."""
    return 0.5 * (h2_dist(w1, o) + h2_dist(w2, o) - h2_dist(w1, w2))


def h2_four_point_margin(w1, w2, w3, w4):
    """``N12 N34 + N14 N23 - N13 N24`` where ``N`` is :func:`pair_norm`.

    Nonnegative for every quadruple of the half-plane, which is the four-point
    form of strong hyperbolicity with parameter 1.
    """
    w1, w2, w3, w4 = map(_z, (w1, w2, w3, w4))
    _check_upper(w1, w2, w3, w4)
    return (pair_norm(w1, w2) * pair_norm(w3, w4) + pair_norm(w1, w4) * pair_norm(w2, w3)
            - pair_norm(w1, w3) * pair_norm(w2, w4))


def h2_delta_defect(w1, w2, w3, w4):
    """Half the gap between the two largest pair sums of hyperbolic distances."""
    w1, w2, w3, w4 = map(_z, (w1, w2, w3, w4))
    s = np.stack([
        h2_dist(w1, w2) + h2_dist(w3, w4),
        h2_dist(w1, w3) + h2_dist(w2, w4),
        h2_dist(w1, w4) + h2_dist(w2, w3),
    ])
    s = np.sort(s, axis=0)
    return 0.5 * (s[2] - s[1])


# -- boundary ----------------------------------------------------------------

def boundary_product_i(a, b) -> float:
    """Gromov product of two real boundary points seen from ``i``.

    ``log(|a - i| |b - i| / |a - b|)``; raises ``ValueError`` if ``a == b``.
    """
    a = _z(a).real if isinstance(a, RBoundaryPoint) else float(a)
    b = _z(b).real if isinstance(b, RBoundaryPoint) else float(b)
    if a == b:
        raise ValueError("boundary product of a point with itself is infinite")
    return math.log(math.hypot(a, 1.0) * math.hypot(b, 1.0) / abs(a - b))


@dataclass(frozen=True)
class BoundaryLimit:
    """Gromov products at interior approximants ``a + ih``, ``b + ih`` for decreasing ``h``."""

    heights: tuple
    values: tuple
    exact: float
    monotone: bool

    @property
    def final_error(self) -> float:
        return abs(self.values[-1] - self.exact)


def boundary_product_limit(a, b, heights: Sequence[float] = APPROXIMANT_HEIGHTS) -> BoundaryLimit:
    """Approximate :func:`boundary_product_i` through interior points.

    ``monotone`` reports whether the errors shrink strictly along the height
    grid (or sit at rounding level), which is how convergence rather than a
    lucky value is exposed.
    """
    a = float(_z(a).real) if isinstance(a, RBoundaryPoint) else float(a)
    b = float(_z(b).real) if isinstance(b, RBoundaryPoint) else float(b)
    exact = boundary_product_i(a, b)
    vals = tuple(float(h2_gromov_product(complex(a, h), complex(b, h), 1j)) for h in heights)
    errs = [abs(v - exact) for v in vals]
    floor = 1e-12 * max(1.0, abs(exact))
    monotone = all(e2 < e1 or e2 <= floor for e1, e2 in zip(errs, errs[1:]))
    return BoundaryLimit(tuple(heights), vals, exact, monotone)


def boundary_defect(a: float) -> float:
    """``min{(a,0)_i, (0,-a)_i} - (a,-a)_i`` for boundary points, equal to ``log(2/sqrt(a^2+1))``."""
    if not a > 0:
        raise ValueError("a must be positive")
    return min(boundary_product_i(a, 0.0), boundary_product_i(0.0, -a)) - boundary_product_i(a, -a)


def interior_defect(a: float, h: float) -> float:
    """The same defect with each boundary point replaced by its approximant at height ``h``."""
    pa, p0, pm = complex(a, h), complex(0.0, h), complex(-a, h)
    g = lambda u, v: h2_gromov_product(u, v, 1j)  # noqa: E731
    return min(g(pa, p0), g(p0, pm)) - g(pa, pm)


def optimal_delta_experiment(a_values: Sequence[float]) -> list[tuple[float, float]]:
    """Rows ``(a, log(2/sqrt(a^2+1)))``; the defect increases to ``log 2`` as ``a`` decreases to 0."""
    rows = []
    for a in a_values:
        a = float(a)
        if not a > 0:
            raise ValueError(f"a-values must be positive, got {a}")
        rows.append((a, math.log(2.0 / math.sqrt(a * a + 1.0))))
    return rows


# -- reflection quotient -----------------------------------------------------

def averaged_quotient_distance(p, q):
    """Average of ``|p - g q|`` over ``g`` in {identity, reflection in the real axis}."""
    p, q = _z(p), _z(q)
    return 0.5 * (np.abs(p - q) + np.abs(p - np.conj(q)))


def quotient_ptolemy_margin(p1, p2, p3, p4):
    """Ptolemy slack ``d12 d34 + d14 d23 - d13 d24`` for the averaged distance."""
    p1, p2, p3, p4 = map(_z, (p1, p2, p3, p4))
    d = averaged_quotient_distance
    return d(p1, p2) * d(p3, p4) + d(p1, p4) * d(p2, p3) - d(p1, p3) * d(p2, p4)


# -- sampling ----------------------------------------------------------------

def _check_bounds(bounds, upper: bool):
    xmin, xmax, ymin, ymax = map(float, bounds)
    if not (xmin < xmax and ymin < ymax):
        raise ValueError(f"empty region {bounds}")
    if upper and ymin < 0:
        raise ValueError("y-bounds must be nonnegative for half-plane sampling")
    return xmin, xmax, ymin, ymax


def sample_h2_quadruples(bounds=(-10.0, 10.0, 0.0, 10.0), count: int = 1, seed: int = 0) -> np.ndarray:
    """Seeded uniform quadruples in ``[xmin, xmax] x (ymin, ymax]``.

    Returns a complex array of shape ``(count, 4)``. Heights are drawn as
    ``ymax - U (ymax - ymin)`` with ``U`` in ``[0, 1)``, so they never reach ``ymin``
    and stay positive even for ``ymin = 0``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    xmin, xmax, ymin, ymax = _check_bounds(bounds, upper=True)
    rng = np.random.default_rng(seed)
    x = rng.uniform(xmin, xmax, size=(count, 4))
    y = ymax - rng.random((count, 4)) * (ymax - ymin)
    return x + 1j * y


def sample_planar_quadruples(bounds=(-10.0, 10.0, -10.0, 10.0), count: int = 1, seed: int = 0) -> np.ndarray:
    """Seeded uniform planar quadruples in the closed box, as a ``(count, 4)`` complex array."""
    if count < 1:
        raise ValueError("count must be at least 1")
    xmin, xmax, ymin, ymax = _check_bounds(bounds, upper=False)
    rng = np.random.default_rng(seed)
    return rng.uniform(xmin, xmax, size=(count, 4)) + 1j * rng.uniform(ymin, ymax, size=(count, 4))


def margins(quads: np.ndarray) -> np.ndarray:
    """Worst :func:`h2_four_point_margin` over the three diagonal pairings of each row.

    Each row of the ``(m, 4)`` array is tested with every pair of opposite
    sides playing the diagonal, so the result does not depend on point order.
    """
    q = np.asarray(quads)
    a, b, c, d = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    return np.minimum.reduce([h2_four_point_margin(a, b, c, d), h2_four_point_margin(a, c, b, d),
                              h2_four_point_margin(a, b, d, c)])


def h2_space(points, labels=None):
    """Finite subset of the half-plane as a validated metric space."""
    from .spaces import FiniteMetricSpace

    z = np.array([_z(p) for p in points], dtype=complex)
    D = h2_dist(z[:, None], z[None, :])
    D = np.atleast_2d(D)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(D, labels)
