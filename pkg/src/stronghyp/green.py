"""Green function and Green metric of random walks on free groups.

The walk is killed when it leaves the ball of radius ``R``; the killed Green
function ``G_R`` increases to ``G`` as ``R`` grows, so every value here is a
certified lower bound up to solver tolerance. Because the measure is
symmetric, ``I - P_R`` is symmetric positive definite and is solved by
conjugate gradients; a Neumann series is available as an independent check.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _config
from .errors import ConvergenceError, InvariantViolation
from .freegroup import (Ball, FreeGroupWord, WalkMeasure, _as_letters, format_word, inverse,
                        multiply, reduce)
from .spaces import FiniteMetricSpace


# -- linear algebra ----------------------------------------------------------

@numba.njit(cache=True, parallel=True)
def _killed_apply(T, p, v, out):
    """out = (I - P_R) v for v of shape (N, m); entries of T equal to -1 are killed."""
    N, m = v.shape
    nsteps = T.shape[0]
    for x in numba.prange(N):
        for c in range(m):
            out[x, c] = v[x, c]
        for j in range(nsteps):
            y = T[j, x]
            if y >= 0:
                pj = p[j]
                for c in range(m):
                    out[x, c] -= pj * v[y, c]


class KilledChain:
    """The walk on a ball, killed on exit, as a gather-based linear operator."""

    def __init__(self, mu: WalkMeasure, R: int, cap: int = _config.BALL_STATE_CAP):
        self.mu = mu
        self.ball = Ball(mu.rank, R, cap)
        cache: dict = {}
        self.T = np.stack([self.ball.word_targets(w, cache) for w in mu.words])
        self.p = mu.probs.astype(np.float64)

    @property
    def size(self) -> int:
        return self.ball.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        v2 = v.reshape(self.size, -1)
        out = np.empty_like(v2)
        _killed_apply(self.T, self.p, np.ascontiguousarray(v2), out)
        return out.reshape(v.shape)

    def solve_cg(self, B: np.ndarray, rtol: float = _config.SOLVER_RTOL,
                 maxiter: int = _config.SOLVER_MAXITER):
        """Column-wise conjugate gradients for ``(I - P_R) X = B``.

        Stops when every column's residual 2-norm is at most ``rtol`` times the
        norm of its right-hand side. Returns ``(X, residual norms, iterations)``.
        """
        B = np.asarray(B, dtype=np.float64).reshape(self.size, -1)
        X = np.zeros_like(B)
        Rm = B.copy()
        P = Rm.copy()
        rs = np.einsum("ij,ij->j", Rm, Rm)
        target = (rtol * np.sqrt(np.einsum("ij,ij->j", B, B))) ** 2
        it = 0
        while np.any(rs > target):
            if it >= maxiter:
                raise ConvergenceError(f"conjugate gradients did not reach {rtol} in {maxiter} iterations")
            AP = self.apply(P)
            pAp = np.einsum("ij,ij->j", P, AP)
            active = rs > target
            alpha = np.where(active, rs / np.where(pAp > 0, pAp, 1.0), 0.0)
            X += alpha * P
            Rm -= alpha * AP
            rs_new = np.einsum("ij,ij->j", Rm, Rm)
            beta = np.where(active, rs_new / np.where(rs > 0, rs, 1.0), 0.0)
            P = Rm + beta * P
            rs = rs_new
            it += 1
        # report the true residual, not the recursively updated one
        res = np.sqrt(np.einsum("ij,ij->j", B - self.apply(X), B - self.apply(X)))
        return X, res, it

    def sparse_matrix(self):
        """``I - P_R`` as a scipy CSR matrix."""
        import scipy.sparse as sp

        rows, cols, vals = [], [], []
        for j in range(self.T.shape[0]):
            inside = np.nonzero(self.T[j] >= 0)[0]
            rows.append(inside)
            cols.append(self.T[j][inside])
            vals.append(np.full(inside.size, -self.p[j]))
        N = self.size
        P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
        return (sp.identity(N, format="csr") + P).tocsr()

    def solve_neumann(self, b: np.ndarray, tol: float = _config.SOLVER_RTOL,
                      maxiter: int = _config.SOLVER_MAXITER):
        """Accumulate ``sum_n P_R^n b`` until the increment's sup-norm is below ``tol``."""
        b = np.asarray(b, dtype=np.float64).reshape(self.size, 1)
        term = b.copy()
        acc = b.copy()
        for it in range(1, maxiter + 1):
            term = term - self.apply(term)  # P term
            acc += term
            inc = float(np.abs(term).max())
            if inc < tol:
                return acc, inc, it
        raise ConvergenceError(f"Neumann series increment still {inc:.3e} after {maxiter} terms")


# -- Green tables ------------------------------------------------------------

@dataclass
class GreenTable:
    """Killed Green function ``G_R(e, x)`` for every ``x`` in the ball of radius ``R``.

    ``F(e, x) = G_R(e, x) / G_R(e, e)`` is the probability that the killed walk
    from ``x`` ever reaches ``e`` (equal to ``F(e, x^-1)`` by symmetry), which
    increases to ``F(e, x)`` of the infinite walk as ``R`` grows.
    """

    mu: WalkMeasure
    radius: int
    ball: Ball
    g: np.ndarray
    method: str
    err: float
    iterations: int

    def index(self, w) -> int:
        i = self.ball.index(w)
        if i < 0:
            raise KeyError(f"{format_word(_as_letters(w))} lies outside the solved ball of radius {self.radius}")
        return i

    @property
    def G_ee(self) -> float:
        return float(self.g[0])

    def G(self, x, y=None) -> float:
        """``G_R(x, y)`` read through group invariance as ``G_R(e, x^-1 y)``."""
        w = _as_letters(x) if y is None else multiply(inverse(_as_letters(x)), _as_letters(y))
        return float(self.g[self.index(w)])

    def F(self, x, y=None) -> float:
        return self.G(x, y) / self.G_ee

    @property
    def F_all(self) -> np.ndarray:
        return self.g / self.g[0]

    def green_length(self) -> np.ndarray:
        """``-log F(e, x)`` over the whole ball."""
        with np.errstate(divide="ignore"):
            return -np.log(self.F_all)

    def entry_err(self, idx) -> np.ndarray:
        """First-order error of ``-log F`` from the solver error on ``g``."""
        g = self.g[idx]
        with np.errstate(divide="ignore"):
            return self.err / g + self.err / self.g[0]

    def values(self, max_length: int | None = None) -> dict:
        L = self.radius if max_length is None else max_length
        out = {}
        for i in range(int(self.ball.offsets[L + 1])):
            out[format_word(self.ball.word(i))] = {
                "G_lower": float(self.g[i]), "F": float(self.g[i] / self.g[0]),
                "method": self.method, "err": float(self.err),
            }
        return out


def green_function_truncated(mu: WalkMeasure, R: int, method: str = "cg", *,
                             rtol: float = _config.SOLVER_RTOL,
                             maxiter: int = _config.SOLVER_MAXITER,
                             cap: int = _config.BALL_STATE_CAP) -> GreenTable:
    """Solve ``(I - P_R) g = 1_e`` on the ball of radius ``R``.

    Parameters
    ----------
    mu : WalkMeasure
    R : int
        Ball radius; the walk is killed on leaving the ball.
    method : {"cg", "neumann"}
        Conjugate gradients (``err`` = final residual norm) or Neumann series
        (``err`` = last increment).

    Raises
    ------
    ResourceCapError
        If the ball exceeds ``cap`` states.
    ConvergenceError
        If the iteration does not converge within ``maxiter``.
    """
    if R < 0:
        raise ValueError("radius must be nonnegative")
    chain = KilledChain(mu, R, cap)
    b = np.zeros((chain.size, 1))
    b[0, 0] = 1.0
    if method == "cg":
        X, res, it = chain.solve_cg(b, rtol, maxiter)
        err = float(res[0])
    elif method == "neumann":
        X, err, it = chain.solve_neumann(b, rtol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    g = X[:, 0]
    if not np.all(g >= 0):
        # tiny negative values are solver noise at unreachable states
        if g.min() < -10 * max(err, 1e-300):
            raise InvariantViolation(f"negative Green value {g.min():.3e}")
        g = np.maximum(g, 0.0)
    return GreenTable(mu, R, chain.ball, g, method, err, it)


# -- exact nearest-neighbour values ------------------------------------------

def nn_first_passage(mu: WalkMeasure, tol: float = 1e-16, maxiter: int = 1_000_000) -> np.ndarray:
    """``F(e, s)`` for each letter ``s`` of a nearest-neighbour walk.

    Iterates ``F_s = mu(s) + F_s sum_{t != s} mu(t) F_{t^-1}`` from zero, which
    converges monotonically to the minimal (probabilistic) solution.
    """
    if not mu.nearest_neighbour:
        raise ValueError("exact first-passage values need a nearest-neighbour measure")
    m = mu.letter_probs()
    F = np.zeros_like(m)
    inv = np.arange(len(m)) ^ 1
    for _ in range(maxiter):
        s = m @ F[inv]  # sum_t mu(t) F_{t^-1}
        new = m + F * (s - m * F[inv])
        if np.max(np.abs(new - F)) <= tol:
            return new
        F = new
    raise ConvergenceError("first-passage fixed point did not converge")


def nn_green_ee(mu: WalkMeasure) -> float:
    """``G(e, e) = 1 / (1 - sum_t mu(t) F(e, t^-1))`` for nearest-neighbour walks."""
    F = nn_first_passage(mu)
    m = mu.letter_probs()
    return 1.0 / (1.0 - float(m @ F[np.arange(len(m)) ^ 1]))


def nn_green_length(mu: WalkMeasure, w) -> float:
    """Exact ``|e, w|_G``: the sum of ``-log F(e, s)`` over the letters of ``w``."""
    F = nn_first_passage(mu)
    return float(sum(-math.log(F[c]) for c in _as_letters(w)))


# -- Green metric tables -----------------------------------------------------

@dataclass
class GreenMetricTable:
    """Pairwise Green distances over a ball of points.

    ``kind`` is ``"invariant"`` (``-log F(e, x^-1 y)`` read from one table) or
    ``"killed"`` (exact Green metric of the walk killed outside a larger ball).
    Unreachable pairs are kept as ``inf`` and listed in ``unreachable``.
    """

    words: list
    dist: np.ndarray
    err: np.ndarray
    kind: str
    solve_radius: int
    meta: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [format_word(w) for w in self.words]

    @property
    def unreachable(self) -> list[tuple[str, str]]:
        bad = np.argwhere(~np.isfinite(self.dist))
        return [(format_word(self.words[i]), format_word(self.words[j])) for i, j in bad if i < j]

    def to_space(self) -> FiniteMetricSpace:
        if self.unreachable:
            raise InvariantViolation(f"{len(self.unreachable)} pairs unreachable under truncation, "
                                     f"e.g. {self.unreachable[0]}")
        return FiniteMetricSpace(self.dist, self.labels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "green_dist", "err"])
        labels = self.labels
        n = len(labels)
        for i in range(n):
            for j in range(i + 1, n):
                w.writerow([labels[i], labels[j], repr(float(self.dist[i, j])), repr(float(self.err[i, j]))])
        return buf.getvalue()


def green_metric_table(table: GreenTable, radius: int | None = None) -> GreenMetricTable:
    """Green distances ``-log F(e, x^-1 y)`` between all points of the ball of ``radius``.

    Needs ``2 radius <= table.radius``; the default is the largest such radius.
    """
    r = table.radius // 2 if radius is None else radius
    if 2 * r > table.radius:
        raise ValueError(f"pairs in the ball of radius {r} need a table of radius {2 * r}, "
                         f"have {table.radius}")
    ball = table.ball
    n = int(ball.offsets[r + 1])
    words = [ball.word(i) for i in range(n)]
    idx = np.empty((n, n), dtype=np.int64)
    for i, x in enumerate(words):
        xi = inverse(x)
        for j, y in enumerate(words):
            idx[i, j] = ball.index(multiply(xi, y))
    length = table.green_length()
    D = length[idx]
    E = table.entry_err(idx)
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(E, 0.0)
    D = np.minimum(D, D.T)
    return GreenMetricTable(words, D, E, "invariant", table.radius,
                            {"method": table.method, "residual": table.err})


def green_metric_ball(mu: WalkMeasure, radius: int, solve_radius: int | None = None, *,
                      chunk: int = 256, rtol: float = _config.SOLVER_RTOL,
                      cap: int = _config.BALL_STATE_CAP) -> GreenMetricTable:
    """Green metric of the walk killed outside the ball of ``solve_radius``, on the ball of ``radius``.

    ``d(x, y) = -log(G_S(x, y) / sqrt(G_S(x, x) G_S(y, y)))`` with ``G_S`` the
    killed Green function. This is a genuine metric for every ``S`` (the
    killed chain still satisfies ``G(x, z) G(y, y) >= G(x, y) G(y, z)``), and it
    increases to the Green metric of the walk on the group as ``S`` grows.
    For nearest-neighbour walks it is exactly a tree metric.

    Many right-hand sides share one operator here, so the system is factorized
    once by sparse LU (no fill-in on the tree ordering) instead of iterated.
    """
    from scipy.sparse.linalg import splu

    S = radius + max(3, 2 * mu.step_length) if solve_radius is None else solve_radius
    if S < radius:
        raise ValueError("solve radius must be at least the point radius")
    chain = KilledChain(mu, S, cap)
    A = chain.sparse_matrix()
    lu = splu(A.tocsc())
    n = int(chain.ball.offsets[radius + 1])
    G = np.empty((n, n))
    worst = 0.0
    for a in range(0, n, chunk):
        b = min(n, a + chunk)
        B = np.zeros((chain.size, b - a))
        B[np.arange(a, b), np.arange(b - a)] = 1.0
        X = lu.solve(B)
        worst = max(worst, float(np.sqrt(((A @ X - B) ** 2).sum(axis=0)).max()))
        G[:, a:b] = X[:n]
    G = 0.5 * (G + G.T)
    diag = np.sqrt(np.diag(G))
    with np.errstate(divide="ignore"):
        D = -np.log(G / diag[:, None] / diag[None, :])
        E = worst * (1.0 / G + 0.5 / diag[:, None] ** 2 + 0.5 / diag[None, :] ** 2)
    D = np.maximum(np.minimum(D, D.T), 0.0)
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(E, 0.0)
    words = [chain.ball.word(i) for i in range(n)]
    return GreenMetricTable(words, D, E, "killed", S, {"method": "sparse-lu", "residual": worst})


# -- comparison with the word metric -----------------------------------------

@dataclass
class WordGreenComparison:
    """Affine comparison of the Green and word metrics on a ball.

    ``C1`` is the least constant with ``|p,q|_G <= C1 |p,q| + C1``; ``slope`` is
    the least ``s`` with ``|p,q|_G <= s |p,q|``; ``C2`` is the largest defect
    ``|x,p|_G + |p,z|_G - |x,z|_G`` over word geodesics ``x, p, z``.
    """

    C1: float
    slope: float
    C2: float
    radius: int
    C2_witness: tuple


def word_green_comparison(table: GreenTable, radius: int | None = None) -> WordGreenComparison:
    """Word-versus-Green constants over all words of length at most ``radius``.

    By group invariance every pair reduces to ``(e, w)`` and every geodesic
    triple to ``(e, p, w)`` with ``p`` a prefix of ``w``.
    """
    r = table.radius - 2 if radius is None else radius
    if not 1 <= r <= table.radius:
        raise ValueError("comparison radius must lie in [1, table radius]")
    ball = table.ball
    n = int(ball.offsets[r + 1])
    ell = table.green_length()[:n]
    L = ball.length[:n].astype(np.float64)
    C1 = float(np.max(ell / (L + 1.0)))
    slope = float(np.max(ell[1:] / L[1:]))
    # defect ell(p) + ell(p^-1 w) - ell(w) for each proper prefix p of w
    best, witness = 0.0, ((), ())
    for i in range(1, n):
        w = ball.word(i)
        for k in range(1, len(w)):
            p, rest = w[:k], w[k:]
            d = ell[ball.index(p)] + ell[ball.index(rest)] - ell[i]
            if d > best:
                best, witness = float(d), (p, w)
    return WordGreenComparison(C1, slope, best, r, tuple(format_word(x) for x in witness))


# -- Ancona ratios -----------------------------------------------------------

def geodesic_separation(x, y, z, t) -> int:
    """Word distance between the tree geodesics ``[x, z]`` and ``[y, t]``."""
    d = lambda u, v: len(multiply(inverse(u), v))  # noqa: E731
    x, y, z, t = map(_as_letters, (x, y, z, t))
    s_xy = d(x, y) + d(z, t)
    s_xt = d(x, t) + d(y, z)
    s_xz = d(x, z) + d(y, t)
    return max(0, (min(s_xy, s_xt) - s_xz) // 2)


def separated_quadruples(k: int, R: int, count: int, seed: int = 0, max_arm: int = 2):
    """Random quadruples whose geodesics ``[x, z]`` and ``[y, t]`` are exactly ``R`` apart.

    ``x`` and ``z`` start with different letters, so ``[x, z]`` runs through
    ``e``; the bridge ``b`` has length ``R`` and leaves ``e`` in a third
    direction; ``y = b v1`` and ``t = b v2`` branch at ``b``. The four arm
    lengths are drawn independently from ``1..max_arm`` so that the cross
    distances differ and radial Green functions are not trivially balanced.
    """
    if R < 1:
        raise ValueError("separation must be at least 1")
    if k < 2:
        raise ValueError("need rank at least 2")
    rng = np.random.default_rng(seed)
    nl = 2 * k

    def extend(prefix, n):
        w = list(prefix)
        for _ in range(n):
            opts = [c for c in range(nl) if c != w[-1] ^ 1]
            w.append(int(rng.choice(opts)))
        return tuple(w)

    out = []
    for _ in range(count):
        arms = rng.integers(1, max_arm + 1, size=4)
        first = rng.choice(nl, size=3, replace=False)
        x = extend((int(first[0]),), arms[0] - 1)
        z = extend((int(first[1]),), arms[1] - 1)
        b = extend((int(first[2]),), R - 1)
        opts = [c for c in range(nl) if c != b[-1] ^ 1]
        s1, s2 = rng.choice(opts, size=2, replace=False)
        y = extend(b + (int(s1),), arms[2] - 1)
        t = extend(b + (int(s2),), arms[3] - 1)
        out.append((x, y, z, t))
    return out


@dataclass
class AnconaScan:
    rows: list  # (R, defect, quadruple as strings)
    slope: float
    medians: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "defect"])
        for R, d, _ in self.rows:
            w.writerow([R, repr(d)])
        return buf.getvalue()


def median_slope(medians: dict) -> float:
    """Least-squares slope of ``log(median defect)`` against ``R`` (``nan`` if any median is 0)."""
    Rs = np.array(sorted(medians), dtype=float)
    vals = np.array([medians[int(R)] for R in Rs])
    if len(Rs) < 2 or np.any(vals <= 0):
        return math.nan
    return float(np.polyfit(Rs, np.log(vals), 1)[0])


def ancona_ratio_scan(table: GreenTable, quadruples, margin: int = 2) -> AnconaScan:
    """``|G(x,y) G(z,t) / (G(x,t) G(z,y)) - 1|`` for quadruples with separated geodesics.

    Every difference ``u^-1 v`` of the quadruple must lie at least ``margin``
    inside the solved ball; quadruples with intersecting geodesics (separation 0)
    are rejected.
    """
    rows = []
    limit = table.radius - margin
    for q in quadruples:
        x, y, z, t = map(_as_letters, q)
        R = geodesic_separation(x, y, z, t)
        if R < 1:
            raise ValueError(f"geodesics of {tuple(map(format_word, (x, y, z, t)))} intersect")
        diffs = [multiply(inverse(u), v) for u, v in ((x, y), (z, t), (x, t), (z, y))]
        if max(len(d) for d in diffs) > limit:
            raise ValueError(f"quadruple reaches beyond radius {limit} of the solved ball")
        Gxy, Gzt, Gxt, Gzy = (table.g[table.index(d)] for d in diffs)
        defect = abs(Gxy * Gzt / (Gxt * Gzy) - 1.0)
        rows.append((R, float(defect), tuple(format_word(u) for u in (x, y, z, t))))
    rows.sort(key=lambda r: r[0])
    medians = {}
    for R in sorted({r[0] for r in rows}):
        medians[R] = float(np.median([r[1] for r in rows if r[0] == R]))
    return AnconaScan(rows, median_slope(medians), medians)


# -- strong hyperbolicity of Green balls -------------------------------------

@dataclass
class GreenEBReport:
    n: int
    eps_star: float
    eps_witness: tuple | None
    delta: float
    delta_exact: bool
    delta_witness: tuple | None
    eb_constants: tuple | None
    eb_ok: bool | None
    eb_violations: int | None
    max_abs_B: float | None
    kind: str

    def to_json(self) -> dict:
        return {
            "n": self.n, "kind": self.kind,
            "eps_star": "inf" if math.isinf(self.eps_star) else self.eps_star,
            "eps_witness": None if self.eps_witness is None else list(self.eps_witness),
            "delta": self.delta, "delta_exact": self.delta_exact,
            "delta_witness": None if self.delta_witness is None else list(self.delta_witness),
            "eb_constants": None if self.eb_constants is None else list(self.eb_constants),
            "eb_ok": self.eb_ok, "eb_violations": self.eb_violations, "max_abs_B": self.max_abs_B,
        }


def eb_check_green(metric: GreenMetricTable, *, threads: int = 1, quartic_cap: int = 600,
                   defect_cap: int = 30) -> GreenEBReport:
    """Load a Green metric table as a finite space and certify its strong hyperbolicity.

    ``eps_star`` is always exact. The delta scan is exact up to ``quartic_cap``
    points and otherwise replaced by the basepoint bound ``2 delta_e``, whose
    witness quadruple contains ``e``. The (EB) check with constants derived
    from ``eps_star`` runs only for at most ``defect_cap`` points.

    Raises
    ------
    MetricValidationError
        If the table violates the triangle inequality, meaning the truncation
        radius was too small.
    """
    from . import constants, fourpoint

    space = metric.to_space()
    e = fourpoint.eps_star(space, threads=threads)
    if space.n <= quartic_cap:
        d = fourpoint.delta_four_point(space, threads=threads)
        delta, exact, dw = d.value, True, d.witness
    else:
        b = fourpoint.basepoint_delta(space, 0)
        delta, exact, dw = 2.0 * b.value, False, b.witness
    eb = ok = nviol = maxB = None
    if math.isfinite(e.value) and space.n <= defect_cap:
        eb = constants.eb_constants_from_strong(e.value)
        ok, viol = fourpoint.check_EB(space, *eb)
        nviol = len(viol)
        _, B = fourpoint.defect_arrays(space)
        maxB = float(np.abs(B).max())
    return GreenEBReport(space.n, e.value, e.witness, delta, exact, dw, eb, ok, nviol, maxB, metric.kind)
