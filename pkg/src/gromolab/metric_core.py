"""Backend-agnostic Gromov-hyperbolic primitives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from gromolab import hplane
from gromolab.report import BoundReport

PROJECTION_XTOL = 1e-10


class UnsupportedOperation(RuntimeError):
    pass


@dataclass(frozen=True)
class MetricSpace:
    """A distance oracle plus optional geodesic and ball oracles.

    geodesic(p, q, t) is the point at arclength t along a fixed geodesic from
    p to q.  ball(x, R) lists the designated points within R of x.
    """

    backend: str  # "graph" or "half-plane"
    distance: Callable[[Any, Any], float]
    geodesic: Optional[Callable[[Any, Any, float], Any]] = None
    ball: Optional[Callable[[Any, float], list]] = None
    path: Optional[Callable[[Any, Any], list]] = None

    def d(self, p, q):
        return self.distance(p, q)

    @property
    def exact(self) -> bool:
        return self.backend == "graph"


def half_plane() -> MetricSpace:
    return MetricSpace("half-plane", hplane.hdistance, hplane.hgeodesic_point)


def finite_metric_space(table) -> MetricSpace:
    """Space on points 0..n-1 from a symmetric distance matrix."""
    mat = [list(row) for row in table]
    n = len(mat)
    for i in range(n):
        if len(mat[i]) != n or mat[i][i] != 0:
            raise ValueError("distance table must be square with zero diagonal")
        for j in range(i):
            if mat[i][j] != mat[j][i]:
                raise ValueError(f"distance table not symmetric at ({i}, {j})")
    return MetricSpace("graph", lambda p, q: mat[p][q], ball=lambda x, R: [p for p in range(n) if mat[x][p] <= R])


def gromov_product(x, y, base, space: MetricSpace) -> float:
    d = space.distance
    v = 0.5 * (d(base, x) + d(base, y) - d(x, y))
    if space.exact:
        return v
    return max(0.0, v)


# --- four-point defect -----------------------------------------------------


def point_defect(x, y, z, w, space: MetricSpace):
    """max over the three labelings of min((x|y)_w, (y|z)_w) - (x|z)_w.

    Returns (defect, labeling) where labeling is the reordered (x, y, z, w).
    """
    best, arg = None, None
    for a, b, c in ((x, y, z), (y, x, z), (x, z, y)):
        v = min(gromov_product(a, b, w, space), gromov_product(b, c, w, space)) - gromov_product(a, c, w, space)
        if best is None or v > best:
            best, arg = v, (a, b, c, w)
    return best, arg


def pair_sum_defect(x, y, z, w, space: MetricSpace) -> float:
    """Half the gap between the two largest of the three pair sums."""
    d = space.distance
    s = sorted((d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)))
    return 0.5 * (s[2] - s[1])


@dataclass
class DeltaEstimate:
    """Empirical lower bound on the four-point constant."""

    value: float
    quadruple_count: int
    witness: tuple
    seed: int
    label: str = "empirical lower bound on the four-point constant"


def _draw(sampler, rng, pool):
    if pool is not None:
        return pool[int(rng.integers(len(pool)))]
    return sampler(rng)


def four_point_delta(space: MetricSpace, sampler, n_quadruples: int, seed: int = 0) -> DeltaEstimate:
    """Largest four-point defect over seeded random quadruples.

    ``sampler`` is either a callable taking a numpy Generator and returning a
    point, or a finite sequence of points drawn uniformly with replacement.
    """
    if n_quadruples < 1:
        raise ValueError("n_quadruples must be at least 1")
    pool = None
    if not callable(sampler):
        pool = list(sampler)
        if len({repr(p) for p in pool}) < 4:
            raise ValueError("sampler exhausted: need at least four distinct points")
    rng = np.random.default_rng(seed)
    best, witness = 0, None
    for _ in range(n_quadruples):
        q = tuple(_draw(sampler, rng, pool) for _ in range(4))
        v, lab = point_defect(*q, space)
        if witness is None or v > best:
            best, witness = max(v, 0), lab
    return DeltaEstimate(best, n_quadruples, witness, seed)


def box_sampler(x0=-5.0, x1=5.0, y0=0.1, y1=10.0):
    def draw(rng):
        return complex(rng.uniform(x0, x1), rng.uniform(y0, y1))

    return draw


# --- tripods ---------------------------------------------------------------


@dataclass
class TripodData:
    alpha: float  # (y|z)_x
    beta: float  # (x|z)_y
    gamma: float  # (x|y)_z
    c_x: Any  # on [y, z]
    c_y: Any  # on [x, z]
    c_z: Any  # on [x, y]

    def side_errors(self, x, y, z, space: MetricSpace):
        d = space.distance
        return (
            self.alpha + self.beta - d(x, y),
            self.beta + self.gamma - d(y, z),
            self.alpha + self.gamma - d(x, z),
        )


def tripod_map(x, y, z, space: MetricSpace) -> TripodData:
    if space.geodesic is None:
        raise UnsupportedOperation("tripod map needs a geodesic oracle")
    a = gromov_product(y, z, x, space)
    b = gromov_product(x, z, y, space)
    c = gromov_product(x, y, z, space)
    geo = space.geodesic
    return TripodData(a, b, c, geo(y, z, b), geo(x, z, a), geo(x, y, a))


# --- projections -----------------------------------------------------------


def projection(x, geodesic, space: MetricSpace):
    """Nearest point of a geodesic to x, as (foot, dist).

    ``geodesic`` is a pair of endpoints, an ``HGeodesic`` line, or (graphs) an
    explicit vertex path.  Graph geodesics are scanned exhaustively, ties going
    to the first vertex; half-plane ones use bounded 1-D minimization.
    """
    d = space.distance
    if space.backend == "graph":
        if isinstance(geodesic, tuple) and len(geodesic) == 2 and space.path is not None:
            verts = space.path(*geodesic)
        else:
            verts = list(geodesic)
        if not verts:
            raise ValueError("empty geodesic")
        best = min(range(len(verts)), key=lambda i: (d(x, verts[i]), i))
        return verts[best], d(x, verts[best])

    if isinstance(geodesic, hplane.HGeodesic):
        line = geodesic
        reach = 2.0 * d(x, line.point(0.0)) + 1.0
        f = lambda t: d(x, line.point(t))
        lo, hi = -reach, reach
        at = line.point
    else:
        p, q = geodesic
        length = d(p, q)
        if length == 0:
            return p, d(x, p)
        if space.geodesic is None:
            raise UnsupportedOperation("projection onto a segment needs a geodesic oracle")
        at = lambda t: space.geodesic(p, q, t)
        f = lambda t: d(x, at(t))
        lo, hi = 0.0, length
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": PROJECTION_XTOL})
    t = float(res.x)
    # the bounded search never evaluates the interval ends exactly
    for end in (lo, hi):
        if f(end) < f(t):
            t = end
    return at(t), f(t)


# --- appendix inequality checks ------------------------------------------


def _tol(space):
    return 0.0 if space.exact else 1e-9


def check_projection_inequality(space: MetricSpace, x, y, foot, delta: float) -> BoundReport:
    d = space.distance
    return BoundReport.make(
        "projection_inequality",
        d(x, y),
        d(x, foot) + d(foot, y) - 2 * delta,
        ">=",
        anchor="d(x, y) >= d(x, x') + d(x', y) - 2 delta, x' a projection of x",
        inputs={"delta": delta},
        tol=_tol(space),
    )


def check_quadrilateral(space: MetricSpace, x, y, z, w, delta: float) -> BoundReport:
    d = space.distance
    defect = d(x, z) + d(y, w) - max(d(x, y) + d(z, w), d(x, w) + d(y, z))
    return BoundReport.make(
        "quadrilateral",
        defect,
        2 * delta,
        "<=",
        anchor="d(x,z) + d(y,w) <= max(d(x,y) + d(z,w), d(x,w) + d(y,z)) + 2 delta",
        inputs={"delta": delta},
        tol=_tol(space),
    )


def check_ecartement(space: MetricSpace, x, y, foot_x, foot_y, delta: float) -> BoundReport:
    d = space.distance
    gap = d(foot_x, foot_y)
    return BoundReport.make(
        "projection_spreading",
        d(x, y),
        d(x, foot_x) + gap + d(foot_y, y) - 6 * delta,
        ">=",
        anchor="d(x', y') > 3 delta implies d(x, y) >= d(x, x') + d(x', y') + d(y', y) - 6 delta",
        guard_met=gap > 3 * delta,
        inputs={"delta": delta, "foot_gap": gap},
        tol=_tol(space),
    )


def check_metric_axioms(space: MetricSpace, points: Sequence, rel_tol: float = 1e-9) -> list:
    """Triples violating symmetry or the triangle inequality (empty when fine)."""
    d = space.distance
    tol = 0.0 if space.exact else rel_tol
    bad = []
    n = len(points)
    for i in range(n):
        p = points[i]
        if d(p, p) != 0:
            bad.append(("identity", i))
        for j in range(n):
            q = points[j]
            if abs(d(p, q) - d(q, p)) > tol * max(1.0, d(p, q)):
                bad.append(("symmetry", i, j))
            for k in range(n):
                r = points[k]
                s = d(p, r) + d(r, q)
                if d(p, q) > s + tol * max(1.0, s):
                    bad.append(("triangle", i, j, k))
    return bad
