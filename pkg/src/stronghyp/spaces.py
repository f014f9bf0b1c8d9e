"""Finite metric spaces: validated distance matrices, ingestion, Gromov products."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _config
from ._kernels import triangle_violation
from .errors import MetricValidationError, ParseError


class FiniteMetricSpace:
    """Labeled points with a validated, symmetric distance matrix.

    Parameters
    ----------
    dist : array_like, shape (n, n)
        Pairwise distances.
    labels : sequence of str, optional
        Point identifiers; defaults to ``"0" .. "n-1"``.
    tol : float
        Slack allowed in the triangle check.

    Raises
    ------
    MetricValidationError
        If the matrix is not square, has nonzero diagonal, negative or zero
        off-diagonal entries, is not exactly symmetric, or violates the
        triangle inequality by more than ``tol``. Invalid input is never repaired.
    """

    def __init__(self, dist, labels: Sequence[str] | None = None, tol: float = _config.METRIC_TOL):
        D = np.array(dist, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise MetricValidationError(f"distance matrix must be square, got shape {D.shape}")
        n = D.shape[0]
        if n == 0:
            raise MetricValidationError("empty space")
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = [str(s) for s in labels]
        if len(labels) != n:
            raise MetricValidationError(f"{len(labels)} labels for {n} points")
        if len(set(labels)) != n:
            raise MetricValidationError("labels must be unique")
        if not np.all(np.isfinite(D)):
            raise MetricValidationError("distances must be finite")
        if np.any(np.diag(D) != 0.0):
            raise MetricValidationError("diagonal must be zero")
        if np.any(D != D.T):
            i, j = np.argwhere(D != D.T)[0]
            raise MetricValidationError(f"asymmetric: d[{i},{j}]={D[i, j]} vs d[{j},{i}]={D[j, i]}")
        off = ~np.eye(n, dtype=bool)
        if np.any(D[off] <= 0.0):
            i, j = np.argwhere((D <= 0.0) & off)[0]
            raise MetricValidationError(f"distinct points {i},{j} at distance {D[i, j]}")
        if n >= 3:
            worst, (i, j, k) = triangle_violation(D)
            if worst > tol:
                raise MetricValidationError(
                    f"triangle inequality fails at ({i},{j},{k}): "
                    f"d[{i},{k}]={D[i, k]} > d[{i},{j}]+d[{j},{k}]={D[i, j] + D[j, k]} "
                    f"(excess {worst:.3e})"
                )
        D.setflags(write=False)
        self.dist = D
        self.labels = labels
        self.tol = tol

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n})"

    def index(self, label: str) -> int:
        return self.labels.index(str(label))

    def diameter(self) -> float:
        return float(self.dist.max())

    def subspace(self, idx) -> "FiniteMetricSpace":
        idx = list(idx)
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], [self.labels[i] for i in idx], tol=self.tol)

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.tolist()}

    @classmethod
    def from_points(cls, points, labels=None) -> "FiniteMetricSpace":
        """Euclidean distances between the rows of ``points``."""
        X = np.asarray(points, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
        return cls(D, labels)


def _check_index(space: FiniteMetricSpace, *idx):
    for i in idx:
        if not (0 <= int(i) < space.n):
            raise IndexError(f"point index {i} out of range for {space.n} points")


def gromov_product(space: FiniteMetricSpace, x: int, y: int, o: int) -> float:
    """(x, y)_o = (|x,o| + |y,o| - |x,y|) / 2."""
    _check_index(space, x, y, o)
    D = space.dist
    return 0.5 * (D[x, o] + D[y, o] - D[x, y])


def gromov_product_matrix(space: FiniteMetricSpace, o: int) -> np.ndarray:
    _check_index(space, o)
    D = space.dist
    return 0.5 * (D[:, o][:, None] + D[o, :][None, :] - D)


# -- ingestion ---------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_csv(text: str, tol: float = _config.METRIC_TOL) -> FiniteMetricSpace:
    """Parse ``n`` rows of ``n`` comma-separated numbers, with an optional label header."""
    rows = [r for r in csv.reader(io.StringIO(text))]
    numbered = [(ln, [c.strip() for c in r]) for ln, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not numbered:
        raise ParseError("empty CSV input")
    labels = None
    first_ln, first = numbered[0]
    if not all(_is_number(c) for c in first):
        labels = first
        numbered = numbered[1:]
    n = len(numbered)
    if labels is not None and len(labels) != n:
        raise ParseError(f"line {first_ln}: header has {len(labels)} labels but {n} data rows follow")
    D = np.empty((n, n))
    for r, (ln, cells) in enumerate(numbered):
        if len(cells) != n:
            raise ParseError(f"line {ln}: expected {n} values, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                D[r, c] = float(cell)
            except ValueError:
                raise ParseError(f"line {ln}, column {c + 1}: not a number: {cell!r}") from None
    return FiniteMetricSpace(D, labels, tol=tol)


def parse_json(text: str, tol: float = _config.METRIC_TOL) -> FiniteMetricSpace:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "dist" not in obj:
        raise ParseError('expected an object with a "dist" field')
    try:
        D = np.array(obj["dist"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f'"dist" is not a numeric matrix: {exc}') from None
    return FiniteMetricSpace(D, obj.get("labels"), tol=tol)


def parse_edge_list(text: str, tol: float = _config.METRIC_TOL) -> FiniteMetricSpace:
    """Weighted graph ``u,v,w`` per line (optional header); returns the shortest-path metric."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    edges = []
    names: dict[str, int] = {}
    for ln, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not any(cells):
            continue
        if len(cells) == 2:
            cells.append("1")
        if len(cells) != 3:
            raise ParseError(f"line {ln}: expected 'u,v[,weight]', found {len(cells)} fields")
        if not _is_number(cells[2]):
            if not edges and ln == 1:
                continue  # header
            raise ParseError(f"line {ln}: weight is not a number: {cells[2]!r}")
        w = float(cells[2])
        if not w > 0:
            raise ParseError(f"line {ln}: edge weight must be positive")
        u, v = (names.setdefault(c, len(names)) for c in cells[:2])
        edges.append((u, v, w))
    if not edges:
        raise ParseError("no edges")
    n = len(names)
    u, v, w = map(np.array, zip(*edges))
    G = coo_matrix((w, (u, v)), shape=(n, n)).tocsr()
    D = shortest_path(G, directed=False)
    # path sums may round differently per direction
    D = np.minimum(D, D.T)
    if not np.all(np.isfinite(D)):
        raise ParseError("edge list describes a disconnected graph")
    labels = sorted(names, key=names.get)
    return FiniteMetricSpace(D, labels, tol=tol)


def load_space(path, fmt: str | None = None, tol: float = _config.METRIC_TOL) -> FiniteMetricSpace:
    """Load a space from ``.csv``, ``.json`` or an edge list (``fmt="edges"``)."""
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "json":
        return parse_json(text, tol)
    if fmt in ("edges", "edgelist"):
        return parse_edge_list(text, tol)
    return parse_csv(text, tol)


# -- rough geodesics ---------------------------------------------------------

@dataclass(frozen=True)
class RoughGeodesicPath:
    """A possibly discontinuous path sampled at increasing parameters."""

    parameters: tuple
    points: tuple

    def __post_init__(self):
        if len(self.parameters) != len(self.points):
            raise ValueError(f"{len(self.parameters)} parameters but {len(self.points)} points")
        p = np.asarray(self.parameters, dtype=float)
        if np.any(np.diff(p) <= 0):
            raise ValueError("parameters must be strictly increasing")


def verify_rough_geodesic(space: FiniteMetricSpace, path: RoughGeodesicPath, C: float,
                          tol: float = _config.MARGIN_TOL) -> bool:
    """Check ``|s-s'| - C <= |path(s), path(s')| <= |s-s'| + C`` for every parameter pair."""
    if C < 0:
        raise ValueError("C must be nonnegative")
    _check_index(space, *path.points)
    s = np.asarray(path.parameters, dtype=float)
    idx = np.asarray(path.points, dtype=int)
    gap = np.abs(space.dist[np.ix_(idx, idx)] - np.abs(s[:, None] - s[None, :]))
    return bool(gap.max() <= C + tol)
