"""Cayley graphs with unit edges: free groups, free abelian groups, finite tables.

Elements are stored in canonical form:

* free:k    reduced strings over a, A, b, B, ... (upper case = inverse)
* abelian:k integer tuples
* table     integer indices into the multiplication table
"""
from __future__ import annotations

import math
import string
from collections import deque
from math import comb
from pathlib import Path
from typing import Iterator, Optional

from gromolab.metric_core import MetricSpace

VERTEX_BUDGET = 10_000_000

LETTERS = string.ascii_lowercase


class ResourceError(RuntimeError):
    """A ball would exceed the vertex budget."""


class TableParseError(ValueError):
    pass


class GeneratorError(ValueError):
    pass


# --- free group words ------------------------------------------------------


def invert_letter(c: str) -> str:
    return c.lower() if c.isupper() else c.upper()


def reduce_word(w: str) -> str:
    out = []
    for c in w:
        if out and out[-1] == invert_letter(c):
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def invert_word(w: str) -> str:
    return "".join(invert_letter(c) for c in reversed(w))


def alphabet(k: int) -> str:
    """a A b B ... in length-lex generator order."""
    if not 1 <= k <= len(LETTERS):
        raise GeneratorError(f"generator count must be in 1..{len(LETTERS)}, got {k}")
    return "".join(c + c.upper() for c in LETTERS[:k])


def word_from_indices(seq) -> str:
    """Signed 1-based generator indices to a reduced word: [1, -2] -> 'aB'."""
    out = []
    for s in seq:
        if s == 0:
            raise GeneratorError("generator index 0 is not allowed")
        c = LETTERS[abs(s) - 1]
        out.append(c if s > 0 else c.upper())
    return reduce_word("".join(out))


def word_to_indices(w: str) -> list:
    return [(LETTERS.index(c.lower()) + 1) * (1 if c.islower() else -1) for c in w]


def length_lex_key(w: str, letters: Optional[str] = None):
    order = letters or alphabet(26)
    return (len(w), [order.index(c) for c in w])


# --- finite tables ---------------------------------------------------------


def parse_table(text: str):
    """Parse ``n=<order> k=<gens>``, n rows of n indices, then the generator line."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise TableParseError("empty table file")
    head = dict(tok.split("=", 1) for tok in lines[0].split() if "=" in tok)
    try:
        n, k = int(head["n"]), int(head["k"])
    except (KeyError, ValueError) as exc:
        raise TableParseError(f"bad header {lines[0]!r}; expected 'n=<order> k=<generators>'") from exc
    if n < 1 or k < 0:
        raise TableParseError("order must be positive and generator count nonnegative")
    if len(lines) != n + 2:
        raise TableParseError(f"expected {n} table rows and one generator line, got {len(lines) - 1} lines")
    try:
        table = [[int(v) for v in ln.split(",")] for ln in lines[1 : n + 1]]
        gens = [int(v) for v in lines[n + 1].replace(",", " ").split()]
    except ValueError as exc:
        raise TableParseError(f"non-integer entry: {exc}") from exc
    for i, row in enumerate(table):
        if len(row) != n:
            raise TableParseError(f"row {i} has {len(row)} entries, expected {n}")
        if any(not 0 <= v < n for v in row):
            raise TableParseError(f"row {i} has an entry outside 0..{n - 1}")
        if len(set(row)) != n:
            raise TableParseError(f"row {i} is not a permutation")
    if len(gens) != k:
        raise TableParseError(f"header says k={k} generators, found {len(gens)}")
    if any(not 0 <= g < n for g in gens):
        raise TableParseError("generator index out of range")
    ident = [e for e in range(n) if all(table[e][j] == j and table[j][e] == j for j in range(n))]
    if len(ident) != 1:
        raise TableParseError("table has no two-sided identity")
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if table[table[x][y]][z] != table[x][table[y][z]]:
                    raise TableParseError(f"table is not associative at ({x}, {y}, {z})")
    return table, gens, ident[0]


# --- the space ---------------------------------------------------------------


class CayleySpace:
    """Cayley graph of free:k, abelian:k or a finite table.

    Distances go through normal forms (reduced words, L1 norm, or a BFS
    distance table from the identity).  ``bfs_distance`` is an independent
    bidirectional search used as a cross-check.
    """

    def __init__(self, kind: str, k: int, table=None, gens=None, identity=None, budget: int = VERTEX_BUDGET):
        if kind not in ("free", "abelian", "table"):
            raise ValueError(f"unknown group kind {kind!r}")
        self.kind, self.k, self.budget = kind, k, budget
        self._frozen: Optional[int] = None
        if kind == "free":
            self.letters = alphabet(k)
        elif kind == "abelian":
            if k < 1:
                raise GeneratorError("abelian rank must be positive")
        else:
            self._table, self._gens, self._e = table, list(gens), identity
            n = len(table)
            self._inv = [next(y for y in range(n) if table[x][y] == identity) for x in range(n)]
            steps = []
            for g in self._gens:
                for s in (g, self._inv[g]):
                    if s not in steps:
                        steps.append(s)
            self._steps = steps
            # lazily grown distances from the identity
            self._dist = {identity: 0}
            self._frontier = [identity]
            self._radius = 0

    @classmethod
    def parse(cls, desc: str, budget: int = VERTEX_BUDGET) -> "CayleySpace":
        kind, _, rest = desc.partition(":")
        if kind in ("free", "abelian"):
            try:
                k = int(rest)
            except ValueError as exc:
                raise ValueError(f"bad group descriptor {desc!r}") from exc
            return cls(kind, k, budget=budget)
        if kind == "table":
            try:
                text = Path(rest).read_text()
            except OSError as exc:
                raise TableParseError(f"cannot read table file {rest!r}: {exc}") from exc
            return cls.from_table_text(text, budget)
        raise ValueError(f"bad group descriptor {desc!r}; expected free:k, abelian:k or table:FILE")

    @classmethod
    def from_table_text(cls, text: str, budget: int = VERTEX_BUDGET) -> "CayleySpace":
        table, gens, e = parse_table(text)
        return cls("table", len(gens), table, gens, e, budget)

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:{self.k}"

    # group structure

    def identity(self):
        if self.kind == "free":
            return ""
        if self.kind == "abelian":
            return (0,) * self.k
        return self._e

    def element(self, x):
        """Canonical form of user input: word string, index list, tuple or table index."""
        if self.kind == "free":
            if isinstance(x, str):
                if x == "1" or (x == "e" and "e" not in self.letters):
                    return ""
                bad = [c for c in x if c not in self.letters]
                if bad:
                    raise GeneratorError(f"letters {bad} are outside the alphabet {self.letters}")
                return reduce_word(x)
            w = word_from_indices(x)
            return self.element(w)
        if self.kind == "abelian":
            if isinstance(x, str):
                x = [int(v) for v in x.strip("()").split(",")] if x.strip("()") else []
            x = tuple(int(v) for v in x)
            if len(x) != self.k:
                raise GeneratorError(f"abelian:{self.k} element needs {self.k} coordinates")
            return x
        x = int(x)
        if not 0 <= x < len(self._table):
            raise GeneratorError(f"table element {x} out of range")
        return x

    def mul(self, g, h):
        if self.kind == "free":
            return reduce_word(g + h)
        if self.kind == "abelian":
            return tuple(a + b for a, b in zip(g, h))
        return self._table[g][h]

    def inv(self, g):
        if self.kind == "free":
            return invert_word(g)
        if self.kind == "abelian":
            return tuple(-a for a in g)
        return self._inv[g]

    def generators(self) -> list:
        """Symmetric generating set in expansion order (a, A, b, B, ...)."""
        if self.kind == "free":
            return list(self.letters)
        if self.kind == "abelian":
            out = []
            for i in range(self.k):
                for s in (1, -1):
                    v = [0] * self.k
                    v[i] = s
                    out.append(tuple(v))
            return out
        return list(self._steps)

    def neighbors(self, g) -> list:
        if self.kind == "free":
            # right multiplication by one letter either cancels or appends
            back = g[-1].swapcase() if g else ""
            return [g[:-1] if s == back else g + s for s in self.generators()]
        return [self.mul(g, s) for s in self.generators()]

    # metric

    def norm(self, g) -> int:
        if self.kind == "free":
            return len(g)
        if self.kind == "abelian":
            return sum(abs(a) for a in g)
        self._grow_until(lambda: g in self._dist)
        return self._dist[g]

    def word_distance(self, u, v) -> int:
        u, v = self.element(u), self.element(v)
        return self.norm(self.mul(self.inv(u), v))

    def bfs_distance(self, u, v) -> int:
        """Bidirectional BFS; independent of the normal forms."""
        u, v = self.element(u), self.element(v)
        if u == v:
            return 0
        seen = [{u: 0}, {v: 0}]
        fronts = [[u], [v]]
        while fronts[0] and fronts[1]:
            side = 0 if len(fronts[0]) <= len(fronts[1]) else 1
            nxt = []
            mine, other = seen[side], seen[1 - side]
            for g in fronts[side]:
                for h in self.neighbors(g):
                    if h in other:
                        return mine[g] + 1 + other[h]
                    if h not in mine:
                        mine[h] = mine[g] + 1
                        nxt.append(h)
                if len(mine) > self.budget:
                    raise ResourceError("bidirectional search exceeded the vertex budget")
            fronts[side] = nxt
        raise ValueError("vertices are not connected")

    def graph_geodesic(self, u, v) -> list:
        """Vertex path of length word_distance(u, v); ties broken by generator order."""
        u, v = self.element(u), self.element(v)
        if self.kind == "free":
            w = reduce_word(invert_word(u) + v)
            return [self.mul(u, w[:i]) for i in range(len(w) + 1)]
        if self.kind == "abelian":
            path, cur = [u], list(u)
            for i in range(self.k):
                step = 1 if v[i] > cur[i] else -1
                while cur[i] != v[i]:
                    cur[i] += step
                    path.append(tuple(cur))
            return path
        parent = {u: None}
        queue = deque([u])
        while queue:
            g = queue.popleft()
            if g == v:
                break
            for h in self.neighbors(g):
                if h not in parent:
                    parent[h] = g
                    queue.append(h)
        path = [v]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return path[::-1]

    def geodesic_point(self, u, v, t):
        """Vertex at step floor(t) of the chosen geodesic (clamped to the ends)."""
        path = self.graph_geodesic(u, v)
        i = min(max(int(math.floor(t + 1e-9)), 0), len(path) - 1)
        return path[i]

    # balls

    def _grow_until(self, done) -> None:
        if self.kind != "table":
            return
        while not done():
            if not self._frontier:
                raise ValueError("element not reachable from the identity")
            if self._frozen is not None:
                raise RuntimeError(f"space frozen at radius {self._frozen}; cannot grow further")
            nxt = []
            for g in self._frontier:
                for h in self.neighbors(g):
                    if h not in self._dist:
                        self._dist[h] = self._radius + 1
                        nxt.append(h)
            self._frontier = nxt
            self._radius += 1

    def freeze(self, r_max: int) -> "CayleySpace":
        """Grow the vertex store to r_max and make it read-only."""
        self._grow_until(lambda: self._radius >= r_max or not self._frontier)
        self._frozen = r_max
        return self

    def sphere_counts_bfs(self, center, R: int) -> list:
        """Sphere sizes by BFS holding only the last two levels."""
        center = self.element(center)
        prev, cur = set(), {center}
        counts = [1]
        total = 1
        tree = self.kind == "free"
        for _ in range(R):
            nxt = set()
            for g in cur:
                for h in self.neighbors(g):
                    if h in prev or h in cur:
                        continue
                    if tree and h in nxt:
                        raise AssertionError("cycle met while growing a free group ball")
                    nxt.add(h)
            total += len(nxt)
            if total > self.budget:
                raise ResourceError(f"ball exceeds the vertex budget of {self.budget}")
            counts.append(len(nxt))
            prev, cur = cur, nxt
        return counts

    def sphere_count(self, r: int) -> int:
        if r < 0:
            return 0
        if self.kind == "free":
            if r == 0:
                return 1
            return 2 * self.k * (2 * self.k - 1) ** (r - 1)
        if self.kind == "abelian":
            return self.ball_count_closed(r) - self.ball_count_closed(r - 1)
        return self.sphere_counts_bfs(self.identity(), r)[r]

    def ball_count_closed(self, R: int) -> int:
        if R < 0:
            return 0
        if self.kind == "free":
            k = self.k
            if k == 1:
                return 2 * R + 1
            return 1 + 2 * k * ((2 * k - 1) ** R - 1) // (2 * k - 2)
        if self.kind == "abelian":
            return sum(2**i * comb(self.k, i) * comb(R, i) for i in range(min(self.k, R) + 1))
        raise ValueError("no closed form for table groups")

    def ball_count(self, center=None, R: float = 0, method: str = "auto") -> int:
        """Number of vertices at distance <= R from center."""
        if R < 0:
            raise ValueError("radius must be nonnegative")
        R = int(math.floor(R + 1e-9))
        if center is None:
            center = self.identity()
        center = self.element(center)
        if method == "auto" and self.kind != "table":
            return self.ball_count_closed(R)
        if method not in ("auto", "bfs"):
            raise ValueError(f"unknown counting method {method!r}")
        return sum(self.sphere_counts_bfs(center, R))

    def open_ball_count(self, center=None, R: float = 0) -> int:
        """Vertices at distance < R."""
        if R <= 0:
            return 0
        return self.ball_count(center, math.ceil(R - 1e-9) - 1)

    def ball(self, center=None, R: float = 0) -> list:
        """Closed ball in BFS discovery order (length-lex for free groups)."""
        return list(self.iter_ball(center, R))

    def iter_ball(self, center=None, R: float = 0) -> Iterator:
        if center is None:
            center = self.identity()
        center = self.element(center)
        R = int(math.floor(R + 1e-9))
        if self.kind != "table" and self.ball_count_closed(R) > self.budget:
            raise ResourceError(f"ball exceeds the vertex budget of {self.budget}")
        seen = {center}
        level = [center]
        yield center
        for _ in range(R):
            nxt = []
            for g in level:
                for h in self.neighbors(g):
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
                        yield h
            if len(seen) > self.budget:
                raise ResourceError(f"ball exceeds the vertex budget of {self.budget}")
            level = nxt

    def handle(self) -> MetricSpace:
        return MetricSpace(
            "graph",
            lambda p, q: self.word_distance(p, q),
            geodesic=self.geodesic_point,
            ball=lambda x, R: self.ball(x, R),
            path=self.graph_geodesic,
        )

    def format(self, g) -> str:
        if self.kind == "free":
            return g or "e"
        if self.kind == "abelian":
            return "(" + ",".join(str(a) for a in g) + ")"
        return str(g)


def ball_count(space: CayleySpace, center, R: int, method: str = "auto") -> int:
    return space.ball_count(center, R, method)


def word_distance(space: CayleySpace, u, v) -> int:
    return space.word_distance(u, v)


def graph_geodesic(space: CayleySpace, u, v) -> list:
    return space.graph_geodesic(u, v)
