"""Growth, doubling and packing measurements, and the entropy estimates for free semigroups."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from gromolab import hplane
from gromolab.displacement import CayleyTranslation, IsometryHandle, MobiusIsometry, as_isometry
from gromolab.graph_space import LETTERS, VERTEX_BUDGET, CayleySpace, ResourceError
from gromolab.hplane import MobiusMap
from gromolab.metric_core import MetricSpace
from gromolab.report import BoundReport

LN2 = math.log(2.0)


# --- orbits --------------------------------------------------------------------


@dataclass
class GroupAction:
    """Generators acting on a space, labelled a, b, c, ... (inverses A, B, C, ...)."""

    generators: list  # IsometryHandle per generator

    @classmethod
    def of(cls, *gens) -> "GroupAction":
        return cls([as_isometry(g, LETTERS[i]) for i, g in enumerate(gens)])

    @property
    def letters(self) -> str:
        return "".join(c + c.upper() for c in LETTERS[: len(self.generators)])

    def distance(self, p, q):
        return self.generators[0].distance(p, q)


def _element_ops(g: IsometryHandle):
    """(element, inverse, multiply, key, act) for one backend."""
    if isinstance(g, MobiusIsometry):
        def key(m):
            m = m.sign_normalized()
            if m.exact:
                return m.entries
            return tuple(round(float(e), 9) for e in m.entries)

        return (lambda h: h.m, lambda h: h.m.inverse(), lambda p, q: p @ q, key,
                lambda m, x: hplane.apply(m, x), lambda m: MobiusMap.identity(m.exact))
    if isinstance(g, CayleyTranslation):
        sp = g.space
        return (lambda h: h.g, lambda h: sp.inv(h.g), sp.mul, lambda e: e,
                lambda e, x: sp.mul(e, sp.element(x)), lambda e: sp.identity())
    raise TypeError(f"unsupported isometry type {type(g).__name__}")


@dataclass
class OrbitEnumeration:
    x: object
    R: float
    W: int
    entries: list  # (word, point, displacement), length-lex order, one per group element
    truncated: bool
    action: Optional[GroupAction] = None
    elements_seen: int = 0

    def count(self, r: Optional[float] = None) -> int:
        r = self.R if r is None else r
        return sum(1 for _, _, d in self.entries if d <= r + 1e-12)


def orbit_enumerate(action: GroupAction, x, R: float, W: int, budget: int = VERTEX_BUDGET) -> OrbitEnumeration:
    """All group elements given by reduced words of length <= W with d(x, g x) <= R.

    Distinct words with the same element are listed once (first word in
    length-lex order).  The truncation flag looks one level past the cap: it
    is set when some new element given by a word of length W + 1 lands in
    the ball.
    """
    if W < 1:
        raise ValueError("word cap W must be at least 1")
    gens = action.generators
    elem, inv, mul, key, act, ident = _element_ops(gens[0])
    dist = action.distance
    letters = action.letters
    images = {}
    for i, g in enumerate(gens):
        images[letters[2 * i]] = elem(g)
        images[letters[2 * i + 1]] = inv(g)
    e = ident(images[letters[0]])
    seen = {key(e)}
    entries = [("", x, dist(x, x))]
    level = [("", e)]
    truncated = False
    for n in range(1, W + 2):
        nxt = []
        for w, m in level:
            for c in letters:
                if w and w[-1] == c.swapcase():
                    continue
                m2 = mul(m, images[c])
                k = key(m2)
                if k in seen:
                    continue
                pt = act(m2, x)
                d = dist(x, pt)
                if n > W:
                    if d <= R + 1e-12:
                        truncated = True
                        break
                    continue
                seen.add(k)
                if len(seen) > budget:
                    raise ResourceError("orbit enumeration exceeded the element budget")
                w2 = w + c
                if d <= R + 1e-12:
                    entries.append((w2, pt, d))
                nxt.append((w2, m2))
            if truncated:
                break
        level = nxt
    return OrbitEnumeration(x, R, W, entries, truncated, action, len(seen))


def systole_estimate(action: GroupAction, x, W: int):
    """(min displacement over nontrivial words of length <= W, witness word)."""
    orb = orbit_enumerate(action, x, math.inf, W)
    best = None
    for w, _, d in orb.entries:
        if w and (best is None or d < best[0]):
            best = (d, w)
    if best is None:
        raise ValueError("no nontrivial element enumerated")
    return best


# --- growth ------------------------------------------------------------------------


def _counter(source, center=None) -> Callable[[float], int]:
    if isinstance(source, CayleySpace):
        c = source.identity() if center is None else center
        return lambda R: source.ball_count(c, R)
    if isinstance(source, OrbitEnumeration):
        def count(R):
            if R > source.R + 1e-12:
                raise ValueError(f"enumeration only covers radius {source.R}")
            return source.count(R)
        return count
    if isinstance(source, MetricSpace):
        if source.ball is None:
            raise ValueError("space has no ball enumerator")
        return lambda R: len(source.ball(center, R))
    if callable(source):
        return source
    raise TypeError(f"cannot count balls of {type(source).__name__}")


@dataclass
class GrowthProfile:
    points: list  # (R, count)
    slope_estimate: float  # least-squares slope of ln count over the top half of the grid
    last_point_estimate: float  # ln count(R_max) / R_max
    label: str = "finite-range estimates of the exponential growth rate"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "count"])
        for R, c in self.points:
            w.writerow([_num(R), c])
        return buf.getvalue()


def _num(R):
    return int(R) if float(R).is_integer() else repr(float(R))


def growth_profile(source, R_grid: Sequence[float], center=None) -> GrowthProfile:
    grid = list(R_grid)
    if len(grid) < 2:
        raise ValueError("growth profile needs at least two radii")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("radius grid must be increasing")
    count = _counter(source, center)
    pts = [(R, int(count(R))) for R in grid]
    top = pts[len(pts) // 2:]
    if len(top) < 2:
        top = pts[-2:]
    xs = np.array([float(R) for R, _ in top])
    ys = np.array([math.log(c) for _, c in top])
    slope = float(np.polyfit(xs, ys, 1)[0])
    R_max, c_max = pts[-1]
    last = math.log(c_max) / R_max if R_max > 0 else math.nan
    return GrowthProfile(pts, slope, last)


def doubling_ratio(source, R: float, center=None) -> float:
    """count(closed ball 2R) / count(closed ball R)."""
    count = _counter(source, center)
    den = count(R)
    if den < 1:
        raise ValueError("empty ball")
    return Fraction(int(count(2 * R)), int(den)).__float__()


def check_cocompact_doubling(source, R: float, H: float, D: float, delta: float, center=None) -> BoundReport:
    ratio = doubling_ratio(source, R, center)
    return BoundReport.make(
        "cocompact_doubling",
        ratio,
        81.0 * math.exp(6.5 * H * R),
        "<=",
        anchor="count(2R) / count(R) <= 3^4 e^(13 H R / 2) for R >= 10 (D + 2 delta)",
        guard_met=R >= 10 * (D + 2 * delta),
        inputs={"R": R, "H": H, "D": D, "delta": delta},
    )


# --- packing -----------------------------------------------------------------------


def _space(space) -> MetricSpace:
    return space.handle() if isinstance(space, CayleySpace) else space


def closed_count(space, x, R: float) -> int:
    if isinstance(space, CayleySpace):
        return space.ball_count(x, R)
    sp = _space(space)
    return sum(1 for p in sp.ball(x, R) if sp.distance(x, p) <= R)


def open_count(space, x, R: float) -> int:
    if isinstance(space, CayleySpace):
        return space.open_ball_count(x, R)
    sp = _space(space)
    return sum(1 for p in sp.ball(x, R) if sp.distance(x, p) < R)


def packing_centres(space, x, r0: float, k: int) -> list:
    """Greedy maximal packing by open balls of radius r0/2 inside B(x, k r0 / 2).

    Candidates are the enumerated points within (k - 1) r0 / 2 of x, in scan
    (BFS) order; a candidate is kept when it is at distance >= r0 from every
    kept centre, which is disjointness of the open balls in a geodesic space.
    """
    if k < 5:
        raise ValueError("packing needs k >= 5")
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    sp = _space(space)
    d = sp.distance
    reach = (k - 1) * r0 / 2
    kept = []
    for c in sp.ball(x, reach):
        if d(x, c) > reach:
            continue
        if all(d(c, o) >= r0 for o in kept):
            kept.append(c)
    return kept


def packing_number(space, x, r0: float, k: int) -> int:
    return len(packing_centres(space, x, r0, k))


def check_packing_doubling_sandwich(space, x, r: float, k: int) -> list:
    """Lower and upper reports for the packing number against ball-count ratios."""
    n = packing_number(space, x, r, k)
    low = closed_count(space, x, (k - 1) * r / 2) / open_count(space, x, r)
    high = open_count(space, x, k * r / 2) / open_count(space, x, r / 2)
    anchor = "#B[x,(k-1)r/2] / #B(x,r) <= N_k(r) <= #B(x,kr/2) / #B(x,r/2)"
    inputs = {"r": r, "k": k, "packing": n}
    return [
        BoundReport.make("packing_lower", low, n, "<=", anchor=anchor, inputs=inputs),
        BoundReport.make("packing_upper", n, high, "<=", anchor=anchor, inputs=inputs),
    ]


def _quarter_grid(lo: float, hi: float) -> list:
    start = math.ceil(lo * 4 - 1e-9)
    stop = math.floor(hi * 4 + 1e-9)
    return [i / 4 for i in range(start, stop + 1) if i > 0]


def check_subgroup_doubling(space: CayleySpace, x, sub_generators: Sequence, r0: float, r1: float,
                            C: Optional[float] = None) -> BoundReport:
    """Sub-orbit ratio #B[x,2r] / #B(x,r) against C^3 on r in [r0, r1] (quarter grid).

    C defaults to the full orbit's largest open-ball doubling ratio over
    [r0/2, 5 r1/4]; a supplied C becomes a guard that the full orbit obeys it.
    """
    if not 0 < r0 <= r1:
        raise ValueError("need 0 < r0 <= r1")
    x = space.element(x)
    full = [open_count(space, x, 2 * r) / open_count(space, x, r) for r in _quarter_grid(r0 / 2, 1.25 * r1)]
    measured = max(full)
    guard = True
    if C is None:
        C = measured
    else:
        guard = measured <= C
    W = int(math.ceil(2 * r1)) + 2
    action = GroupAction([CayleyTranslation(space, g) for g in sub_generators])
    orb = orbit_enumerate(action, x, 2 * r1, W)
    sub = []
    for r in _quarter_grid(r0, r1):
        op = sum(1 for _, _, d in orb.entries if d < r)
        sub.append(orb.count(2 * r) / op)
    return BoundReport.make(
        "subgroup_doubling",
        max(sub),
        C**3,
        "<=",
        anchor="C-doubling of the orbit on [r0/2, 5r1/4] gives C^3-doubling of a sub-orbit on [r0, r1]",
        guard_met=guard,
        inputs={"r0": r0, "r1": r1, "C": C, "full_orbit_max_ratio": measured, "truncated": orb.truncated},
    )


# --- entropy of free semigroups --------------------------------------------------------


def _phi(a: float) -> float:
    # (1 + a) ln(1 + a) - a ln a, written to stay accurate for large a
    return math.log1p(a) + a * math.log1p(1.0 / a)


def free_semigroup_entropy_lower(l1: float, l2: float) -> float:
    """sup over a > 0 of max(1/(l1 + a l2), 1/(l2 + a l1)) ((1 + a) ln(1 + a) - a ln a)."""
    if not (l1 > 0 and l2 > 0):
        raise ValueError("displacements must be positive")
    best = 0.0
    us = np.linspace(-50.0, 50.0, 2001)
    for p, q in ((l1, l2), (l2, l1)):
        f = lambda u: -_phi(math.exp(u)) / (p + math.exp(u) * q)
        vals = [f(u) for u in us]
        i = int(np.argmin(vals))
        lo, hi = us[max(i - 1, 0)], us[min(i + 1, len(us) - 1)]
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = max(best, -min(res.fun, vals[i]))
    return best


def check_entropy_action(l1: float, l2: float, H: float) -> list:
    """Necessary conditions for two displacements to generate a free semigroup under entropy H."""
    if not H > 0:
        raise ValueError("H must be positive")
    top, low = max(l1, l2), min(l1, l2)
    inputs = {"l1": l1, "l2": l2, "H": H}
    return [
        BoundReport.make("entropy_action_max", H * top, LN2, ">=",
                         anchor="H max(l1, l2) >= ln 2", inputs=inputs),
        BoundReport.make("entropy_action_min", low, math.exp(-H * top) / H, ">=", strict=True,
                         anchor="min(l1, l2) > e^(-H max(l1, l2)) / H", inputs=inputs),
    ]
