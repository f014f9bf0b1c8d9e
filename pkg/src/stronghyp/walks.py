"""Monte Carlo random walks on F_k.

Each walker draws from its own splitmix64 stream seeded by ``(seed, walker index)``,
and writes only its own output slot, so estimates are bit-identical for a fixed
seed regardless of thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import _config
from .freegroup import WalkMeasure, _as_letters, inverse, multiply

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class MeasureEstimate:
    """An estimated probability or mean with its standard error; ``n = 0`` marks an exact value."""

    value: float
    stderr: float
    n: int

    @property
    def exact(self) -> bool:
        return self.n == 0

    def agrees(self, target: float, sigmas: float) -> bool:
        return abs(self.value - target) <= sigmas * self.stderr

    def to_dict(self) -> dict:
        return {"value": float(self.value), "stderr": float(self.stderr), "n": int(self.n)}


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def _seed_stream(seed, walker):
    return _mix(seed ^ _mix(np.uint64(walker) + _GOLDEN))


@numba.njit(cache=True, inline="always")
def _next_uniform(state):
    state = state + _GOLDEN
    return state, float(_mix(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True, inline="always")
def _pick(cum, u):
    j = 0
    m = cum.shape[0] - 1
    while j < m and u >= cum[j]:
        j += 1
    return j


@numba.njit(cache=True, inline="always")
def _apply(cur, n, match, target, letters, length):
    """Right-multiply the stacked word by a step; ``match`` tracks the common prefix with ``target``."""
    T = target.shape[0]
    for i in range(length):
        c = letters[i]
        if n > 0 and cur[n - 1] == (c ^ 1):
            n -= 1
            if match > n:
                match = n
        else:
            if match == n and n < T and target[n] == c:
                match += 1
            cur[n] = c
            n += 1
    return n, match


@numba.njit(cache=True, parallel=True)
def _hits_kernel(seed, n_walks, cum, step_letters, step_len, target, horizon, escape):
    out = np.zeros(n_walks, dtype=np.uint8)
    T = target.shape[0]
    width = horizon * step_letters.shape[1] + 1
    for w in numba.prange(n_walks):
        state = _seed_stream(seed, w)
        cur = np.empty(width, dtype=np.int8)
        n = 0
        match = 0
        for _ in range(horizon):
            state, u = _next_uniform(state)
            j = _pick(cum, u)
            n, match = _apply(cur, n, match, target, step_letters[j], step_len[j])
            if n == T and match == T:
                out[w] = 1
                break
            if n - match >= escape:
                break
    return out


@numba.njit(cache=True, parallel=True)
def _visits_kernel(seed, n_walks, cum, step_letters, step_len, target, horizon, escape):
    out = np.zeros(n_walks, dtype=np.int32)
    T = target.shape[0]
    width = horizon * step_letters.shape[1] + 1
    for w in numba.prange(n_walks):
        state = _seed_stream(seed, w)
        cur = np.empty(width, dtype=np.int8)
        n = 0
        match = 0
        count = 1 if T == 0 else 0
        for _ in range(horizon):
            state, u = _next_uniform(state)
            j = _pick(cum, u)
            n, match = _apply(cur, n, match, target, step_letters[j], step_len[j])
            if n == T and match == T:
                count += 1
            elif n - match >= escape:
                break
        out[w] = count
    return out


@numba.njit(cache=True, parallel=True)
def _exit_kernel(seed, n_walks, cum, step_letters, step_len, depth, stop_len, step_cap):
    prefixes = np.zeros((n_walks, depth), dtype=np.int8)
    ok = np.zeros(n_walks, dtype=np.uint8)
    dummy = np.empty(0, dtype=np.int8)
    width = stop_len + step_letters.shape[1] + 1
    for w in numba.prange(n_walks):
        state = _seed_stream(seed, w)
        cur = np.empty(width, dtype=np.int8)
        n = 0
        match = 0
        for _ in range(step_cap):
            state, u = _next_uniform(state)
            j = _pick(cum, u)
            n, match = _apply(cur, n, match, dummy, step_letters[j], step_len[j])
            if n >= stop_len:
                ok[w] = 1
                break
        if ok[w]:
            for i in range(depth):
                prefixes[w, i] = cur[i]
    return prefixes, ok


def _step_arrays(mu: WalkMeasure):
    words = mu.words
    width = max(len(w) for w in words)
    letters = np.zeros((len(words), max(width, 1)), dtype=np.int8)
    lens = np.zeros(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        letters[i, :len(w)] = w
        lens[i] = len(w)
    cum = np.cumsum(mu.probs)
    cum[-1] = 1.0
    return cum, letters, lens


def _seed(seed: int) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


def hitting_probability_mc(mu: WalkMeasure, x, y, n_walks: int, horizon: int = _config.MC_HORIZON,
                           seed: int = 0, escape: int = _config.MC_ESCAPE) -> MeasureEstimate:
    """Fraction of walks from ``x`` that visit ``y`` within ``horizon`` steps.

    A lower-biased estimate of ``F(x, y)``. A walk is also retired once its
    word carries ``escape`` letters beyond the longest common prefix with the
    target, since it would have to cancel all of them to get back. Both
    cutoffs cost a bias that is exponentially small for transient walks.
    """
    if n_walks < 1 or horizon < 1 or escape < 1:
        raise ValueError("n_walks, horizon and escape must be positive")
    target = np.array(multiply(inverse(_as_letters(x)), _as_letters(y)), dtype=np.int8)
    if target.size == 0:
        return MeasureEstimate(1.0, 0.0, int(n_walks))
    cum, letters, lens = _step_arrays(mu)
    hits = _hits_kernel(_seed(seed), int(n_walks), cum, letters, lens, target, int(horizon), int(escape))
    p = float(hits.sum()) / n_walks
    return MeasureEstimate(p, math.sqrt(p * (1.0 - p) / n_walks), int(n_walks))


def green_mc(mu: WalkMeasure, x, y, n_walks: int, horizon: int = _config.MC_HORIZON,
             seed: int = 0, escape: int = _config.MC_ESCAPE) -> MeasureEstimate:
    """Mean number of visits to ``y`` (time 0 included) by walks from ``x``.

    Counting stops at ``horizon`` steps or once the walk is ``escape`` letters
    past the target, as in :func:`hitting_probability_mc`.
    """
    if n_walks < 1 or horizon < 1 or escape < 1:
        raise ValueError("n_walks, horizon and escape must be positive")
    target = np.array(multiply(inverse(_as_letters(x)), _as_letters(y)), dtype=np.int8)
    cum, letters, lens = _step_arrays(mu)
    counts = _visits_kernel(_seed(seed), int(n_walks), cum, letters, lens, target, int(horizon), int(escape))
    mean = float(counts.mean())
    sd = float(counts.std(ddof=1)) if n_walks > 1 else 0.0
    return MeasureEstimate(mean, sd / math.sqrt(n_walks), int(n_walks))


@dataclass
class ExitSample:
    """Stabilized depth-``depth`` prefixes of simulated walks."""

    prefixes: np.ndarray
    failures: int
    depth: int
    seed: int

    @property
    def n(self) -> int:
        return int(self.prefixes.shape[0])

    def fraction(self, prefix) -> MeasureEstimate:
        w = _as_letters(prefix)
        if len(w) > self.depth:
            raise ValueError(f"cylinder depth {len(w)} exceeds the stabilization depth {self.depth}")
        if len(w) == 0:
            return MeasureEstimate(1.0, 0.0, self.n)
        hit = np.all(self.prefixes[:, :len(w)] == np.array(w, dtype=np.int8), axis=1)
        p = float(hit.sum()) / self.n
        return MeasureEstimate(p, math.sqrt(p * (1.0 - p) / self.n), self.n)


def simulate_exits(mu: WalkMeasure, n_walks: int, depth: int, seed: int = 0,
                   patience: int = _config.HARMONIC_PATIENCE,
                   step_cap: int = _config.HARMONIC_STEP_CAP) -> ExitSample:
    """Run walks from ``e`` until their depth-``depth`` prefix has frozen.

    The depth-``depth`` prefix can only change while the word is shorter than
    ``depth``, so a walk is classified once its length first reaches
    ``depth + max(depth, patience)``: the word then has at least twice the
    watched length and has grown by the patience window without disturbing the
    prefix. Walks that do not get there within ``step_cap`` steps are failures
    and are excluded from the sample.
    """
    if n_walks < 1 or depth < 1:
        raise ValueError("n_walks and depth must be positive")
    cum, letters, lens = _step_arrays(mu)
    stop = depth + max(depth, patience)
    prefixes, ok = _exit_kernel(_seed(seed), int(n_walks), cum, letters, lens, int(depth), int(stop), int(step_cap))
    good = ok.astype(bool)
    return ExitSample(prefixes[good], int(n_walks - good.sum()), int(depth), int(seed))
