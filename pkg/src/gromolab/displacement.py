"""Displacement, stable length brackets and Margulis domains."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from gromolab import hplane
from gromolab.graph_space import CayleySpace
from gromolab.hplane import DomainError, HGeodesic, IsometryClassError, MobiusMap
from gromolab.metric_core import UnsupportedOperation
from gromolab.report import BoundReport


class IsometryHandle:
    """An isometry together with the space it acts on."""

    backend = ""
    label = ""

    def act(self, x):
        raise NotImplementedError

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def power_displacement(self, x, n: int) -> float:
        """d(x, g^n x)."""
        raise NotImplementedError

    def displacement(self, x) -> float:
        return self.power_displacement(x, 1)

    def is_identity(self) -> bool:
        raise NotImplementedError

    def geodesic_point(self, p, q, t):
        raise UnsupportedOperation(f"no geodesic oracle on the {self.backend} backend")

    def exact_length(self) -> Optional[float]:
        """Translation length when a closed form is available."""
        return None


class MobiusIsometry(IsometryHandle):
    backend = "half-plane"

    def __init__(self, m: MobiusMap, label: str = "g"):
        self.m, self.label = m, label

    def act(self, x):
        return hplane.apply(self.m, x)

    def distance(self, p, q):
        return hplane.hdistance(p, q)

    def power_displacement(self, x, n):
        if n == 0:
            return 0.0
        return hplane.power_displacement(self.m, x, n)

    def is_identity(self):
        return self.m.is_identity()

    def geodesic_point(self, p, q, t):
        return hplane.hgeodesic_point(p, q, t)

    def classify(self):
        return hplane.classify(self.m)

    def exact_length(self):
        kind = self.classify().kind
        return hplane.closed_form_length(self.m) if kind == "Hyperbolic" else 0.0

    def power(self, n: int) -> "MobiusIsometry":
        return MobiusIsometry(self.m**n, f"{self.label}^{n}")


class CayleyTranslation(IsometryHandle):
    """Left multiplication by a group element on its Cayley graph."""

    backend = "graph"

    def __init__(self, space: CayleySpace, g, label: Optional[str] = None):
        self.space, self.g = space, space.element(g)
        self.label = label or space.format(self.g)

    def _pow(self, n):
        sp = self.space
        base = self.g if n >= 0 else sp.inv(self.g)
        out = sp.identity()
        n = abs(n)
        while n:
            if n & 1:
                out = sp.mul(out, base)
            n >>= 1
            if n:
                base = sp.mul(base, base)
        return out

    def act(self, x):
        return self.space.mul(self.g, self.space.element(x))

    def distance(self, p, q):
        return self.space.word_distance(p, q)

    def power_displacement(self, x, n):
        x = self.space.element(x)
        return self.space.word_distance(x, self.space.mul(self._pow(n), x))

    def is_identity(self):
        return self.g == self.space.identity()

    def geodesic_point(self, p, q, t):
        return self.space.geodesic_point(p, q, t)


def as_isometry(g, label="g") -> IsometryHandle:
    if isinstance(g, IsometryHandle):
        return g
    if isinstance(g, MobiusMap):
        return MobiusIsometry(g, label)
    raise TypeError(f"cannot treat {type(g).__name__} as an isometry")


# --- stable length -----------------------------------------------------------


@dataclass
class Bracket:
    lo: float
    hi: float
    n_used: int
    delta_used: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, v, tol=0.0):
        return self.lo - tol <= v <= self.hi + tol


def stable_length_bracket(g, x, n_max: int, delta: float) -> Bracket:
    """Two-sided bracket on the stable length from powers n = 2, 4, ..., <= n_max.

    hi is the best subadditive ratio d(x, g^n x) / n; lo uses the power
    inequality d(x, g^n x) >= d(x, g x) + (n - 1) l - 4 delta log2(n).
    """
    g = as_isometry(g)
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if g.is_identity():
        return Bracket(0.0, 0.0, 1, delta)
    d1 = g.power_displacement(x, 1)
    hi, lo = d1, 0.0
    n, used = 2, 1
    while n <= n_max:
        try:
            dn = g.power_displacement(x, n)
        except OverflowError as exc:
            raise OverflowError(f"overflow at power {n}; use the log-scale displacement routines") from exc
        hi = min(hi, dn / n)
        lo = max(lo, (dn - d1 - 4 * delta * math.log2(n)) / (n - 1))
        used = n
        n *= 2
    # rounding can push lo a hair above hi when the bound is tight
    if lo > hi:
        lo = hi
    return Bracket(lo, hi, used, delta)


@dataclass
class DisplacementMin:
    value: float
    argmin: object
    exact: Optional[float] = None  # s(g) itself when a closed form exists

    def __iter__(self):
        return iter((self.value, self.argmin))


def min_displacement(g, domain: Sequence) -> DisplacementMin:
    """Smallest d(x, g x) over the domain, an upper bound on s(g).

    Ties go to the first point in scan order.
    """
    g = as_isometry(g)
    pts = list(domain)
    if not pts:
        raise ValueError("empty domain")
    best, arg = None, None
    for x in pts:
        v = g.displacement(x)
        if best is None or v < best:
            best, arg = v, x
    exact = None
    if isinstance(g, MobiusIsometry) and g.classify().kind == "Hyperbolic":
        exact = g.exact_length()
    return DisplacementMin(best, arg, exact)


def grid(x0, x1, y0, y1, nx, ny, log_y=True) -> list:
    """Rectangular half-plane grid, geometric in y by default."""
    xs = np.linspace(x0, x1, nx)
    ys = np.geomspace(y0, y1, ny) if log_y else np.linspace(y0, y1, ny)
    return [complex(float(x), float(y)) for y in ys for x in xs]


def axis_grid(m: MobiusMap, n_t=9, rhos=(0.0, 0.25, -0.25, 1.0, -1.0)) -> list:
    """Points at the given signed distances from the axis, one fundamental domain long."""
    ax = hplane.axis(m)
    ell = hplane.closed_form_length(m)
    return [ax.offset_point(ell * i / n_t, r) for r in rhos for i in range(n_t)]


# --- Margulis domains ----------------------------------------------------------


@dataclass
class MargulisQuery:
    gamma: str
    R: float
    k_max: int
    x: object
    value: float
    member: bool
    k_attained: int = 1


def displacement_radius(g, x, ell_lo: float, R: float) -> MargulisQuery:
    """R_g(x) = min over 1 <= k <= k_max of d(x, g^k x), k_max = floor(R / ell_lo) + 1.

    Powers beyond k_max displace by more than R, so membership in M_R is exact.
    """
    g = as_isometry(g)
    if not ell_lo > 0:
        raise UnsupportedOperation(
            "displacement radius needs a positive lower bound on the stable length; "
            "parabolic and torsion elements cannot be truncated"
        )
    k_max = int(math.floor(R / ell_lo)) + 1
    best, kbest = None, 1
    for k in range(1, k_max + 1):
        v = g.power_displacement(x, k)
        if best is None or v < best:
            best, kbest = v, k
    return MargulisQuery(g.label, R, k_max, x, best, best <= R, kbest)


def _hyperbolic(g) -> MobiusIsometry:
    g = as_isometry(g)
    if not isinstance(g, MobiusIsometry):
        raise UnsupportedOperation("this check needs the half-plane backend")
    kind = g.classify().kind
    if kind != "Hyperbolic":
        raise IsometryClassError(f"expected a hyperbolic map, got {kind}")
    return g


def collar_agreement(g, R: float, n_samples: int = 1000, seed: int = 0, band: float = 1e-7) -> dict:
    """Compare sampled membership in M_R against the closed-form collar radius.

    Proposals are uniform in axis parameter over one period and in signed
    axis distance over twice the collar width.
    """
    g = _hyperbolic(g)
    ell = g.exact_length()
    ax = hplane.axis(g.m)
    width = hplane.collar_radius(ell, R) if R >= ell else 1.0
    rng = np.random.default_rng(seed)
    agree = disagree = in_band = members = 0
    for _ in range(n_samples):
        t = rng.uniform(0.0, ell)
        rho = rng.uniform(-2 * width - 1, 2 * width + 1)
        x = ax.offset_point(t, rho)
        q = displacement_radius(g, x, ell, R)
        dist = ax.distance_to(x)
        members += q.member
        if R >= ell and abs(dist - width) <= band:
            in_band += 1
            continue
        predicted = R >= ell and dist <= width
        if predicted == q.member:
            agree += 1
        else:
            disagree += 1
    return {"samples": n_samples, "members": members, "agree": agree, "disagree": disagree,
            "in_band": in_band, "collar_radius": width if R >= ell else None}


def tube_bound(ell: float, R: float, delta: float) -> float:
    return 0.5 * (7 * delta / ell + 1) * R + 3.5 * delta


def check_tube(g, R: float, delta: float = hplane.DELTA_HPLANE, n_samples: int = 1000, seed: int = 0) -> BoundReport:
    """Every sampled point of M_R lies within the tube radius of the axis."""
    g = _hyperbolic(g)
    ell = g.exact_length()
    ax = hplane.axis(g.m)
    bound = tube_bound(ell, R, delta)
    rng = np.random.default_rng(seed)
    worst, accepted = 0.0, 0
    for _ in range(n_samples):
        t = rng.uniform(0.0, ell)
        rho = rng.uniform(-(bound + 1), bound + 1)
        x = ax.offset_point(t, rho)
        if displacement_radius(g, x, ell, R).member:
            accepted += 1
            worst = max(worst, ax.distance_to(x))
    collar = hplane.collar_radius(ell, R) if R >= ell else None
    return BoundReport.make(
        "tube_radius",
        worst,
        bound,
        "<=",
        anchor="M_R(g) lies within (7 delta / l + 1) R / 2 + 7 delta / 2 of the axis",
        guard_met=accepted > 0,
        inputs={"R": R, "delta": delta, "length": ell, "accepted": accepted, "proposals": n_samples,
                "collar_radius": collar},
        tol=1e-9,
    )


def check_distance_to_axis(g, x, delta: float = hplane.DELTA_HPLANE) -> BoundReport:
    g = _hyperbolic(g)
    ell = g.exact_length()
    dist = hplane.axis(g.m).distance_to(x)
    return BoundReport.make(
        "distance_to_axis",
        dist,
        0.5 * (g.displacement(x) - ell) + 3 * delta,
        "<=",
        anchor="l(g) > 3 delta implies d(x, axis) <= (d(x, g x) - l(g)) / 2 + 3 delta",
        guard_met=ell > 3 * delta,
        inputs={"delta": delta, "length": ell},
        tol=1e-9,
    )


def distance_to_domain(g, x, r: float) -> float:
    """Exact distance from x to M_r on the half-plane (inf when M_r is empty)."""
    g = _hyperbolic(g)
    ell = g.exact_length()
    if r < ell:
        return math.inf
    return max(0.0, hplane.axis(g.m).distance_to(x) - hplane.collar_radius(ell, r))


def check_domain_separation(g, r: float, R: float, x) -> BoundReport:
    g = _hyperbolic(g)
    if not r < R:
        raise ValueError("need r < R")
    ell = g.exact_length()
    q = displacement_radius(g, x, ell, R)
    if q.value < R - 1e-9:
        raise DomainError(f"x lies inside M_R (R_g(x) = {q.value} < {R})")
    return BoundReport.make(
        "domain_separation",
        distance_to_domain(g, x, r),
        0.5 * (R - r),
        ">=",
        anchor="d(x, M_r(g)) >= (R - r) / 2 for x outside M_R(g)",
        inputs={"r": r, "R": R, "displacement_radius": q.value},
        tol=1e-9,
    )


def margulis_constant(a, b, points: Sequence, P: int, witness: bool = False):
    """min over points and 1 <= |p|, |q| <= P of max(d(x, a^p x), d(x, b^q x)).

    An upper estimate of L(a, b) on the sampled set.
    """
    a, b = as_isometry(a, "a"), as_isometry(b, "b")
    if P < 1:
        raise ValueError("P must be at least 1")
    powers = [p for p in range(-P, P + 1) if p]
    best = None
    for x in points:
        da = min((a.power_displacement(x, p), p) for p in powers)
        db = min((b.power_displacement(x, q), q) for q in powers)
        v = max(da[0], db[0])
        if best is None or v < best[0]:
            best = (v, x, da[1], db[1])
    if best is None:
        raise ValueError("empty sample set")
    return best if witness else best[0]


def check_midpoint(g, x, delta: float) -> list:
    """Three reports around the midpoint m of [x, g x]."""
    g = as_isometry(g)
    gx = g.act(x)
    d1 = g.distance(x, gx)
    m = g.geodesic_point(x, gx, d1 / 2)
    low = max(0.0, g.power_displacement(x, 2) - d1)
    mid = g.displacement(m)
    ell = g.exact_length()
    if ell is None:
        raise UnsupportedOperation("midpoint check needs a closed-form length")
    anchor = "max(0, d(x, g^2 x) - d(x, g x)) <= d(m, g m) <= that + delta <= l(g) + 3 delta"
    inputs = {"delta": delta, "length": ell}
    return [
        BoundReport.make("midpoint_lower", low, mid, "<=", anchor=anchor, inputs=inputs, tol=1e-9),
        BoundReport.make("midpoint_upper", mid, low + delta, "<=", anchor=anchor, inputs=inputs, tol=1e-9),
        BoundReport.make("midpoint_length", low + delta, ell + 3 * delta, "<=", anchor=anchor, inputs=inputs, tol=1e-9),
    ]


def check_quasigeod(g, x_samples: Sequence, delta: float, n_max: int = 1024) -> list:
    """l_lo <= s_est and s_est <= l_hi + delta.

    On the half-plane the closed-form length replaces the bracket (and equals
    s for hyperbolic maps); elsewhere the bracket at the first sample is used.
    """
    g = as_isometry(g)
    pts = list(x_samples)
    s_est = min_displacement(g, pts).value
    exact = g.exact_length()
    if exact is not None:
        lo = hi = exact
    else:
        br = stable_length_bracket(g, pts[0], n_max, delta)
        lo, hi = br.lo, br.hi
    tol = 1e-9 if g.backend == "half-plane" else 0.0
    anchor = "l(g) <= s(g) <= l(g) + delta"
    inputs = {"delta": delta, "length_lo": lo, "length_hi": hi}
    return [
        BoundReport.make("quasigeod_lower", lo, s_est, "<=", anchor=anchor, inputs=inputs, tol=tol),
        BoundReport.make("quasigeod_upper", s_est, hi + delta, "<=", anchor=anchor, inputs=inputs, tol=tol),
    ]


def check_power_growth(g, x, bracket: Bracket, delta: float, ns=range(2, 65)) -> BoundReport:
    """max over n of d(x, g^n x) - (d(x, g x) + (n - 1) l_hi + 4 delta log2 n), against 0."""
    g = as_isometry(g)
    d1 = g.displacement(x)
    worst, at = -math.inf, None
    for n in ns:
        v = g.power_displacement(x, n) - (d1 + (n - 1) * bracket.hi + 4 * delta * math.log2(n))
        if v > worst:
            worst, at = v, n
    return BoundReport.make(
        "power_growth",
        worst,
        0.0,
        "<=",
        anchor="d(x, g^n x) <= d(x, g x) + (n - 1) l + 4 delta log2(n)",
        inputs={"delta": delta, "length_hi": bracket.hi, "worst_n": at},
        tol=1e-9,
    )


def strictly_increasing_powers(g, x, n_max: int = 32) -> bool:
    g = as_isometry(g)
    ds = [g.power_displacement(x, n) for n in range(1, n_max + 1)]
    return all(b > a for a, b in zip(ds, ds[1:]))


def random_hyperbolic(rng, trace_range=(2.1, 10.0)) -> MobiusMap:
    """diag(l, 1/l) with the drawn trace, conjugated by a random translation, dilation and rotation."""
    tr = rng.uniform(*trace_range)
    lam = (tr + math.sqrt(tr * tr - 4)) / 2
    u = rng.uniform(-1.0, 1.0)
    s = rng.uniform(0.5, 2.0)
    th = rng.uniform(0.0, math.pi)
    shift = MobiusMap(1.0, u, 0.0, 1.0)
    dil = MobiusMap(math.sqrt(s), 0.0, 0.0, 1.0 / math.sqrt(s))
    rot = MobiusMap(math.cos(th), math.sin(th), -math.sin(th), math.cos(th))
    c = shift @ dil @ rot
    return c @ MobiusMap.diag(lam) @ c.inverse()
