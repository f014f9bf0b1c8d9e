"""Free groups F_k: reduced words, balls of the Cayley tree, and walk measures.

Letters are encoded as integers: generator ``i`` is ``2i`` and its inverse is
``2i + 1``, so inversion is ``c ^ 1`` and the alphabet order is
``a < a' < b < b' < ...``. Words print with an apostrophe for inverses
(``"ab'"`` is ``a b^-1``); parsing also accepts an uppercase letter as an inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _config
from .errors import ParseError, ResourceCapError, UnsupportedModelError

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


# -- words -------------------------------------------------------------------

def reduce(letters: Iterable[int]) -> tuple[int, ...]:
    """Free reduction of a letter sequence."""
    out: list[int] = []
    for c in letters:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def parse_word(text: str, rank: int | None = None) -> tuple[int, ...]:
    """Parse ``"ab'a"`` (or ``"abA"``) into reduced letter codes; ``""`` and ``"e"`` are the identity."""
    text = text.strip()
    if text in ("", "e", "1"):
        return ()
    codes: list[int] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace() or ch == "*" or ch == ".":
            i += 1
            continue
        low = ch.lower()
        if low not in ALPHABET:
            raise ParseError(f"invalid letter {ch!r} in word {text!r}")
        g = ALPHABET.index(low)
        if rank is not None and g >= rank:
            raise ParseError(f"letter {ch!r} in {text!r} is not a generator of F_{rank}")
        inv = ch.isupper()
        i += 1
        if i < len(text) and text[i] in "'^":
            if text[i] == "^":
                if text[i:i + 3] != "^-1":
                    raise ParseError(f"unsupported exponent in {text!r}")
                i += 3
            else:
                i += 1
            inv = not inv
        codes.append(2 * g + int(inv))
    return reduce(codes)


def format_word(letters: Sequence[int]) -> str:
    if len(letters) == 0:
        return "e"
    return "".join(ALPHABET[c >> 1] + ("'" if c & 1 else "") for c in letters)


def inverse(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(c ^ 1 for c in reversed(letters))


def multiply(*words: Sequence[int]) -> tuple[int, ...]:
    return reduce(c for w in words for c in w)


def word_dist(x: Sequence[int], y: Sequence[int]) -> int:
    """Word-metric distance ``|x^-1 y|``."""
    return len(multiply(inverse(x), y))


def common_prefix_length(x: Sequence[int], y: Sequence[int]) -> int:
    n = 0
    for a, b in zip(x, y):
        if a != b:
            break
        n += 1
    return n


@dataclass(frozen=True, order=True)
class FreeGroupWord:
    """A reduced word, i.e. an element of F_k."""

    letters: tuple = ()

    def __post_init__(self):
        red = reduce(self.letters)
        if red != tuple(self.letters):
            object.__setattr__(self, "letters", red)

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "FreeGroupWord":
        return cls(parse_word(text, rank))

    def __str__(self):
        return format_word(self.letters)

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "FreeGroupWord") -> "FreeGroupWord":
        return FreeGroupWord(multiply(self.letters, other.letters))

    def inverse(self) -> "FreeGroupWord":
        return FreeGroupWord(inverse(self.letters))


def _as_letters(w) -> tuple[int, ...]:
    if isinstance(w, FreeGroupWord):
        return w.letters
    if isinstance(w, str):
        return parse_word(w)
    return reduce(int(c) for c in w)


# -- balls -------------------------------------------------------------------

def ball_size(k: int, R: int) -> int:
    """Number of reduced words of length at most ``R`` in F_k."""
    if k < 1 or R < 0:
        raise ValueError("need k >= 1 and R >= 0")
    if k == 1:
        return 2 * R + 1
    return 1 + 2 * k * ((2 * k - 1) ** R - 1) // (2 * k - 2)


def enumerate_ball(k: int, R: int, cap: int = _config.BALL_STATE_CAP) -> list[FreeGroupWord]:
    """All reduced words of length ``<= R`` in length-lex order."""
    ball = Ball(k, R, cap)
    return [FreeGroupWord(ball.word(i)) for i in range(ball.size)]


class Ball:
    """Array encoding of the ball of radius ``R`` in the Cayley tree of F_k.

    Words are stored in length-lex order. For a word of length ``L`` with local
    index ``j`` in its sphere and last letter ``c``, the child obtained by
    appending ``s != c^1`` has local index ``j (2k - 1) + r`` with ``r = s`` if
    ``s < c^1`` and ``s - 1`` otherwise. Hence ``parent`` is integer division.
    """

    def __init__(self, k: int, R: int, cap: int = _config.BALL_STATE_CAP):
        size = ball_size(k, R)
        if size > cap:
            raise ResourceCapError(f"ball of radius {R} in F_{k} has {size} words, above the cap {cap}")
        self.k, self.R, self.size = k, R, size
        nl = 2 * k
        allowed = np.array([[s for s in range(nl) if s != c ^ 1] for c in range(nl)], dtype=np.int8)
        lasts = [np.array([-1], dtype=np.int8)]
        parents = [np.array([-1], dtype=np.int32)]
        offsets = [0, 1]
        for L in range(1, R + 1):
            if L == 1:
                last = np.arange(nl, dtype=np.int8)
                par = np.zeros(nl, dtype=np.int32)
            else:
                prev = lasts[-1]
                last = allowed[prev.astype(np.intp)].ravel()
                par = np.repeat(np.arange(offsets[-2], offsets[-1], dtype=np.int32), nl - 1)
            lasts.append(last)
            parents.append(par)
            offsets.append(offsets[-1] + len(last))
        self.last = np.concatenate(lasts)
        self.parent = np.concatenate(parents)
        self.offsets = np.array(offsets, dtype=np.int64)
        self.length = np.repeat(np.arange(R + 1, dtype=np.int8), np.diff(self.offsets))

    def __len__(self):
        return self.size

    def sphere(self, L: int) -> slice:
        return slice(int(self.offsets[L]), int(self.offsets[L + 1]))

    def word(self, idx: int) -> tuple[int, ...]:
        out = []
        idx = int(idx)
        while idx > 0:
            out.append(int(self.last[idx]))
            idx = int(self.parent[idx])
        return tuple(reversed(out))

    def index(self, word) -> int:
        """Index of a word, or -1 if it lies outside the ball."""
        letters = _as_letters(word)
        if len(letters) > self.R:
            return -1
        idx = 0
        for L, s in enumerate(letters):
            if s >= 2 * self.k:
                raise ValueError(f"letter code {s} outside F_{self.k}")
            if L == 0:
                local = s
            else:
                c = int(self.last[idx])
                local = (idx - int(self.offsets[L])) * (2 * self.k - 1) + (s if s < (c ^ 1) else s - 1)
            idx = int(self.offsets[L + 1]) + local
        return idx

    def letter_targets(self, s: int) -> np.ndarray:
        """Index of ``x s`` for every ``x`` in the ball, ``-1`` when it leaves the ball."""
        nl = 2 * self.k
        last = self.last.astype(np.int64)
        L = self.length.astype(np.int64)
        out = np.full(self.size, -1, dtype=np.int32)
        back = last == (s ^ 1)
        out[back] = self.parent[back]
        grow = ~back & (L < self.R)
        idx = np.nonzero(grow)[0]
        Lg = L[idx]
        local = idx - self.offsets[Lg]
        c = last[idx]
        r = np.where(c < 0, s, np.where(s < (c ^ 1), s, s - 1))
        out[idx] = (self.offsets[Lg + 1] + local * (nl - 1) + r).astype(np.int32)
        return out

    def word_targets(self, word, cache: dict | None = None) -> np.ndarray:
        """Index of ``x w`` for every ``x``; ``-1`` if ``x w`` (hence the path to it) leaves the ball.

        Applying a reduced word letter by letter first cancels and then grows,
        so an intermediate exit implies a final exit.
        """
        letters = _as_letters(word)
        cache = {} if cache is None else cache
        t = np.arange(self.size, dtype=np.int32)
        for s in letters:
            if s not in cache:
                cache[s] = self.letter_targets(s)
            ts = cache[s]
            inside = t >= 0
            t = np.where(inside, ts[np.where(inside, t, 0)], -1).astype(np.int32)
        return t

    def words(self) -> list[tuple[int, ...]]:
        return [self.word(i) for i in range(self.size)]


# -- walk measures -----------------------------------------------------------

def _generates(rank: int, words: Iterable[Sequence[int]]) -> bool:
    """Whether the words generate all of F_rank, by folding their wedge of loops."""
    # vertices of the folded graph, union-find plus labelled edges
    parent: list[int] = [0]
    edges: list[dict[int, int]] = [{}]

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def new_vertex():
        parent.append(len(parent))
        edges.append({})
        return len(parent) - 1

    pending: list[tuple[int, int, int]] = []

    def add_edge(u, c, v):
        pending.append((u, c, v))
        pending.append((v, c ^ 1, u))

    for w in words:
        if not w:
            continue
        v = 0
        for i, c in enumerate(w):
            nxt = 0 if i == len(w) - 1 else new_vertex()
            add_edge(v, c, nxt)
            v = nxt

    while pending:
        u, c, v = pending.pop()
        u, v = find(u), find(v)
        other = edges[u].get(c)
        if other is None:
            edges[u][c] = v
            continue
        other = find(other)
        if other == v:
            continue
        # fold: merge v into other, re-queue v's edges
        parent[v] = other
        moved = edges[v]
        edges[v] = {}
        for c2, t in moved.items():
            pending.append((other, c2, t))
        edges[u][c] = other
    roots = {find(v) for v in range(len(parent))}
    if len(roots) != 1:
        return False
    r = roots.pop()
    return all(c in edges[r] for c in range(2 * rank))


class WalkMeasure:
    """A symmetric, finitely supported probability measure on F_k.

    Parameters
    ----------
    rank : int
        Number of free generators ``k``; rank 1 is rejected because every such
        walk on the integers is recurrent.
    steps : mapping
        Word (string, letter tuple or :class:`FreeGroupWord`) to probability.
    tol : float
        Allowed error on the total mass and on ``mu(x) = mu(x^-1)``.
    """

    def __init__(self, rank: int, steps: Mapping, tol: float = 1e-12):
        if int(rank) != rank or rank < 1:
            raise ValueError(f"rank must be a positive integer, got {rank}")
        rank = int(rank)
        if rank == 1:
            raise UnsupportedModelError(
                "rank-1 walks are recurrent (the Green function diverges); only k >= 2 is supported")
        if rank > len(ALPHABET):
            raise UnsupportedModelError(f"rank above {len(ALPHABET)} is not supported")
        table: dict[tuple[int, ...], float] = {}
        for w, p in steps.items():
            letters = parse_word(w, rank) if isinstance(w, str) else _as_letters(w)
            if any(c >= 2 * rank for c in letters):
                raise ValueError(f"step {format_word(letters)} uses letters outside F_{rank}")
            p = float(p)
            if not p > 0:
                raise ValueError(f"step {format_word(letters)} has nonpositive probability {p}")
            if letters in table:
                raise ValueError(f"step {format_word(letters)} listed twice")
            table[letters] = p
        total = sum(table.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"step probabilities sum to {total!r}, not 1")
        for w, p in table.items():
            q = table.get(inverse(w))
            if q is None or abs(p - q) > tol:
                raise ValueError(f"measure is not symmetric at {format_word(w)}: {p} vs {q}")
        if not _generates(rank, table):
            raise ValueError(f"support does not generate F_{rank}")
        self.rank = rank
        self.steps = dict(sorted(table.items(), key=lambda kv: (len(kv[0]), kv[0])))
        self.tol = tol

    @classmethod
    def simple(cls, rank: int) -> "WalkMeasure":
        """Uniform measure on the generators and their inverses."""
        if rank < 1:
            raise ValueError("rank must be positive")
        return cls(rank, {(c,): 1.0 / (2 * rank) for c in range(2 * rank)})

    @property
    def words(self) -> list[tuple[int, ...]]:
        return list(self.steps)

    @property
    def probs(self) -> np.ndarray:
        return np.array(list(self.steps.values()))

    @property
    def step_length(self) -> int:
        return max(len(w) for w in self.steps)

    @property
    def nearest_neighbour(self) -> bool:
        return all(len(w) == 1 for w in self.steps)

    def letter_probs(self) -> np.ndarray:
        """``mu(s)`` for each letter code (nearest-neighbour measures)."""
        out = np.zeros(2 * self.rank)
        for w, p in self.steps.items():
            if len(w) == 1:
                out[w[0]] = p
        return out

    def __eq__(self, other):
        return isinstance(other, WalkMeasure) and self.rank == other.rank and self.steps == other.steps

    def __repr__(self):
        body = ", ".join(f"{format_word(w)}: {p:g}" for w, p in self.steps.items())
        return f"WalkMeasure(rank={self.rank}, {{{body}}})"

    def to_config(self) -> dict:
        return {"rank": self.rank, "steps": [{"word": format_word(w), "p": p} for w, p in self.steps.items()]}

    @classmethod
    def from_config(cls, obj) -> "WalkMeasure":
        if not isinstance(obj, dict) or "rank" not in obj or "steps" not in obj:
            raise ParseError('walk config must be an object with "rank" and "steps"')
        rank = obj["rank"]
        if not isinstance(rank, int):
            raise ParseError(f'"rank" must be an integer, got {rank!r}')
        steps = {}
        if not isinstance(obj["steps"], list):
            raise ParseError('"steps" must be a list')
        for n, item in enumerate(obj["steps"]):
            if not isinstance(item, dict) or "word" not in item or "p" not in item:
                raise ParseError(f'step {n}: expected {{"word": ..., "p": ...}}')
            try:
                p = float(item["p"])
            except (TypeError, ValueError):
                raise ParseError(f"step {n}: probability is not a number") from None
            w = parse_word(str(item["word"]), rank if rank >= 1 else None)
            if w in steps:
                raise ValueError(f"step {format_word(w)} listed twice")
            steps[w] = p
        return cls(rank, steps)


def load_walk_config(path) -> WalkMeasure:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return WalkMeasure.from_config(obj)


def dump_walk_config(mu: WalkMeasure, path) -> None:
    Path(path).write_text(json.dumps(mu.to_config(), indent=2) + "\n")


def nonuniform_f2() -> WalkMeasure:
    """The fixed non-uniform nearest-neighbour test measure on F_2."""
    return WalkMeasure(2, _config.NONUNIFORM_F2)
