"""Upper half-plane model of the hyperbolic plane.

Points are Python complex numbers with positive imaginary part.  Isometries
are real 2x2 matrices of determinant one, identified up to sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from gromolab.report import BoundReport

Number = Union[float, Fraction, int]

# |trace| - 2 inside this band is treated as parabolic (floating mode only)
TRACE_BAND = 1e-9
# Gromov four-point constant used for every bound check on the half-plane
DELTA_HPLANE = math.log(3.0)


class DomainError(ValueError):
    """A point or map lies outside the domain of an operation."""


class IsometryClassError(ValueError):
    """An operation requires an isometry of a different type."""


def hpoint(x: float, y: float) -> complex:
    if not y > 0:
        raise DomainError(f"half-plane point needs positive imaginary part, got {y!r}")
    return complex(x, y)


def _check(p: complex) -> None:
    if not p.imag > 0:
        raise DomainError(f"half-plane point needs positive imaginary part, got {p!r}")


def hdistance(p: complex, q: complex) -> float:
    """Hyperbolic distance, arccosh(1 + |p-q|^2 / (2 Im p Im q)).

    Evaluated as 2 asinh(|p-q| / (2 sqrt(Im p Im q))) which keeps precision for
    nearby points.
    """
    _check(p)
    _check(q)
    return 2.0 * math.asinh(abs(p - q) / (2.0 * math.sqrt(p.imag * q.imag)))


def _displacement_at_i(a: float, b: float, c: float, d: float, log_scale: float = 0.0) -> float:
    # distance from i to A(i) for A = e^log_scale * [[a, b], [c, d]] in SL(2, R):
    # sinh(dist / 2) = sqrt((b + c)^2 + (a - d)^2) / 2
    q = math.hypot(b + c, a - d)
    if q == 0.0:
        return 0.0
    log_y = log_scale + math.log(q / 2.0)
    if log_y > 20.0:
        return 2.0 * (log_y + math.log(2.0))
    return 2.0 * math.asinh(math.exp(log_y))


@dataclass(frozen=True)
class MobiusMap:
    """z -> (az + b) / (cz + d) with ad - bc = 1.

    Entries are floats, or Fractions in exact mode (used by the relation
    oracle).  Equality is taken up to global sign.
    """

    a: Number
    b: Number
    c: Number
    d: Number

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if self.exact:
            if det != 1:
                raise DomainError(f"exact matrix must have determinant 1, got {det}")
        elif not abs(det - 1.0) <= 1e-12 * max(1.0, self.norm() ** 2):
            raise DomainError(f"matrix determinant {det!r} is not 1")

    @classmethod
    def from_entries(cls, a, b, c, d) -> "MobiusMap":
        """Build a map, rescaling a positive-determinant matrix into SL(2, R)."""
        entries = (a, b, c, d)
        if all(isinstance(e, (int, Fraction)) for e in entries):
            entries = tuple(Fraction(e) for e in entries)
            det = entries[0] * entries[3] - entries[1] * entries[2]
            if det == 1:
                return cls(*entries)
            entries = tuple(float(e) for e in entries)
        a, b, c, d = (float(e) for e in entries)
        det = a * d - b * c
        if not det > 0:
            raise DomainError(f"matrix determinant must be positive, got {det!r}")
        s = math.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @classmethod
    def identity(cls, exact: bool = False) -> "MobiusMap":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return cls(one, zero, zero, one)

    @classmethod
    def diag(cls, lam: float) -> "MobiusMap":
        return cls(lam, 0.0, 0.0, 1.0 / lam)

    @property
    def exact(self) -> bool:
        return all(isinstance(e, Fraction) for e in self.entries)

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def norm(self) -> float:
        return max(abs(float(e)) for e in self.entries)

    def trace(self) -> Number:
        return self.a + self.d

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        out = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        if not all(isinstance(v, Fraction) for v in out):
            out = tuple(float(v) for v in out)
            if not all(math.isfinite(v) for v in out):
                raise OverflowError(
                    "matrix entries overflow in floating mode; "
                    "switch to the log-scale displacement routines"
                )
        return MobiusMap(*out)

    def __pow__(self, n: int) -> "MobiusMap":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = MobiusMap.identity(self.exact)
        while n:
            if n & 1:
                result = result @ base
            n >>= 1
            if n:
                base = base @ base
        return result

    def __call__(self, z: complex) -> complex:
        return apply(self, z)

    def sign_normalized(self) -> "MobiusMap":
        for e in self.entries:
            if e != 0:
                if e < 0:
                    return MobiusMap(*(-v for v in self.entries))
                return self
        return self

    def same_isometry(self, other: "MobiusMap", tol: float = 1e-12) -> bool:
        p, q = self.sign_normalized(), other.sign_normalized()
        if self.exact and other.exact:
            return p.entries == q.entries
        scale = max(1.0, p.norm(), q.norm())
        return all(abs(float(x) - float(y)) <= tol * scale for x, y in zip(p.entries, q.entries))

    def is_identity(self, tol: float = 1e-12) -> bool:
        return self.same_isometry(MobiusMap.identity(self.exact), tol)

    def as_float(self) -> "MobiusMap":
        return MobiusMap(*(float(e) for e in self.entries))

    def text(self) -> str:
        return "{},{};{},{}".format(*(str(e) for e in self.entries))


def _parse_entry(tok: str) -> Fraction:
    tok = tok.strip()
    if not tok:
        raise ValueError("empty matrix entry")
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad matrix entry {tok!r}") from exc


def parse_matrix(text: str) -> MobiusMap:
    """Parse ``a,b;c,d`` (decimals or p/q rationals).

    Rational input with determinant exactly one stays exact; otherwise the
    matrix is rescaled in floating point.  The first nonzero entry is made
    positive.
    """
    rows = text.strip().split(";")
    if len(rows) != 2:
        raise ValueError(f"matrix must look like 'a,b;c,d', got {text!r}")
    cells = [r.split(",") for r in rows]
    if any(len(r) != 2 for r in cells):
        raise ValueError(f"matrix must look like 'a,b;c,d', got {text!r}")
    a, b, c, d = (_parse_entry(t) for r in cells for t in r)
    return MobiusMap.from_entries(a, b, c, d).sign_normalized()


def apply(m: MobiusMap, z: complex) -> complex:
    _check(z)
    a, b, c, d = (float(e) for e in m.entries)
    den = c * z + d
    if den == 0:
        raise DomainError("cz + d vanishes: image at infinity")
    w = (a * z + b) / den
    if not w.imag > 0:
        raise DomainError(f"image {w!r} left the half-plane (underflow)")
    return w


def _to_i(x: complex) -> MobiusMap:
    # isometry sending x to i: z -> (z - Re x) / Im x
    s = math.sqrt(x.imag)
    return MobiusMap(1.0 / s, -x.real / s, 0.0, s)


def displacement(m: MobiusMap, x: complex) -> float:
    """d(x, m x), computed from the matrix entries."""
    _check(x)
    g = _to_i(x)
    a, b, c, d = (float(e) for e in (g @ m.as_float() @ g.inverse()).entries)
    return _displacement_at_i(a, b, c, d)


# --- log-scaled powers ------------------------------------------------------
# A scaled matrix is (entries, s) standing for e^s * entries with the largest
# entry of magnitude one; powers of hyperbolic maps never overflow this way.


def _normalize(entries, s=0.0):
    top = max(abs(e) for e in entries)
    if top == 0:
        raise DomainError("zero matrix")
    return tuple(e / top for e in entries), s + math.log(top)


def scaled(m: MobiusMap):
    return _normalize(tuple(float(e) for e in m.entries))


def scaled_mul(p, q):
    (a, b, c, d), s = p
    (e, f, g, h), t = q
    return _normalize((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h), s + t)


def scaled_power(m: MobiusMap, n: int):
    base = scaled(m if n >= 0 else m.inverse())
    n = abs(n)
    result = ((1.0, 0.0, 0.0, 1.0), 0.0)
    while n:
        if n & 1:
            result = scaled_mul(result, base)
        n >>= 1
        if n:
            base = scaled_mul(base, base)
    return result


def scaled_displacement(sm, x: complex) -> float:
    """d(x, A x) for a scaled matrix A."""
    _check(x)
    (a, b, c, d), s = sm
    # conjugate by z -> (z - u) / y, which sends x = u + iy to i
    u, y = x.real, x.imag
    a2 = a - u * c
    b2 = (a * u + b - u * u * c - u * d) / y
    c2 = c * y
    d2 = c * u + d
    return _displacement_at_i(a2, b2, c2, d2, s)


def power_displacement(m: MobiusMap, x: complex, n: int) -> float:
    return scaled_displacement(scaled_power(m, n), x)


# --- classification -------------------------------------------------------

INF = math.inf


@dataclass(frozen=True)
class IsometryClass:
    kind: str  # Identity | Elliptic | Parabolic | Hyperbolic
    fixed: tuple = ()  # boundary fixed points; (repelling, attracting) when hyperbolic
    interior_fixed: Optional[complex] = None
    trace: float = 0.0

    def as_dict(self) -> dict:
        out = {"class": self.kind, "fixed": [_boundary_json(p) for p in self.fixed], "trace": float(self.trace)}
        if self.interior_fixed is not None:
            out["interior_fixed"] = [self.interior_fixed.real, self.interior_fixed.imag]
        return out


def _boundary_json(p):
    return "inf" if p == INF else float(p)


def classify(m: MobiusMap) -> IsometryClass:
    a, b, c, d = m.entries
    tr = a + d
    if m.is_identity():
        return IsometryClass("Identity", (), None, float(tr))
    gap = abs(tr) - 2
    tr = float(tr)
    if m.exact:
        kind = "Hyperbolic" if gap > 0 else "Parabolic" if gap == 0 else "Elliptic"
    else:
        kind = "Hyperbolic" if gap > TRACE_BAND else "Parabolic" if gap >= -TRACE_BAND else "Elliptic"
    a, b, c, d = (float(e) for e in (a, b, c, d))
    if kind == "Parabolic":
        fixed = (INF,) if c == 0 else ((a - d) / (2 * c),)
        return IsometryClass(kind, fixed, None, tr)
    if kind == "Elliptic":
        # c z^2 + (d - a) z - b = 0 with negative discriminant, c != 0
        disc = (d - a) ** 2 + 4 * b * c
        z = complex(-(d - a), math.sqrt(-disc)) / (2 * c)
        if z.imag < 0:
            z = z.conjugate()
        return IsometryClass(kind, (), z, tr)
    # hyperbolic: order the fixed points as (repelling, attracting); the
    # attracting one has |c z + d| > 1
    if c == 0:
        finite = b / (d - a) + 0.0
        pts = (finite, INF) if abs(a) > abs(d) else (INF, finite)
        return IsometryClass(kind, pts, None, tr)
    disc = math.sqrt((d - a) ** 2 + 4 * b * c)
    r1 = (a - d - disc) / (2 * c)
    r2 = (a - d + disc) / (2 * c)
    if abs(c * r1 + d) > 1:
        r1, r2 = r2, r1
    return IsometryClass(kind, (r1 + 0.0, r2 + 0.0), None, tr)


def closed_form_length(m: MobiusMap) -> float:
    """Translation length 2 arccosh(|trace| / 2) of a hyperbolic map."""
    cls = classify(m)
    if cls.kind != "Hyperbolic":
        raise IsometryClassError(f"translation length formula needs a hyperbolic map, got {cls.kind}")
    return 2.0 * math.acosh(abs(float(m.trace())) / 2.0)


# --- geodesics --------------------------------------------------------------


class HGeodesic:
    """Arclength-parameterized geodesic line from boundary point ``start`` to ``end``.

    c(t) = g(i e^(t + shift)) where g sends 0 to start and infinity to end.
    """

    def __init__(self, start: float, end: float, shift: float = 0.0):
        if start == end:
            raise DomainError("geodesic endpoints must differ")
        self.start, self.end, self.shift = start, end, shift
        if end == INF:
            g = MobiusMap(1.0, start, 0.0, 1.0)
        elif start == INF:
            # z -> end - 1/z sends 0 to infinity and infinity to end
            g = MobiusMap(end, -1.0, 1.0, 0.0)
        else:
            k = 1.0 if end > start else -1.0
            det = k * (end - start)
            s = math.sqrt(det)
            g = MobiusMap(end / s, k * start / s, 1.0 / s, k / s)
        self._g = g
        self._ginv = g.inverse()

    @classmethod
    def through(cls, p: complex, q: complex) -> "HGeodesic":
        """Full geodesic through p and q, oriented from p to q, with c(0) = p."""
        _check(p)
        _check(q)
        if p == q:
            raise DomainError("need two distinct points")
        if abs(p.real - q.real) <= 1e-15 * max(1.0, abs(p), abs(q)):
            geo = cls(p.real, INF) if q.imag > p.imag else cls(INF, p.real)
        else:
            centre = (abs(q) ** 2 - abs(p) ** 2) / (2 * (q.real - p.real))
            r = abs(p - centre)
            # the endpoints solve x^2 - 2 centre x + (2 centre Re p - |p|^2) = 0; take the
            # small root from the product to avoid cancellation on huge circles
            big = centre + math.copysign(r, centre)
            small = (2 * centre * p.real - abs(p) ** 2) / big if big else 0.0
            lo, hi = sorted((big, small))
            geo = cls(lo, hi) if q.real > p.real else cls(hi, lo)
        return geo.shifted(geo.param_of(p))

    def shifted(self, s: float) -> "HGeodesic":
        """Same line, reparameterized so that new c(t) = old c(t + s)."""
        return HGeodesic(self.start, self.end, self.shift + s)

    def _std(self, z: complex) -> complex:
        return apply(self._ginv, z)

    def point(self, t: float) -> complex:
        u = t + self.shift
        return apply(self._g, complex(0.0, math.exp(u)))

    __call__ = point

    def offset_point(self, t: float, rho: float) -> complex:
        """Point at signed distance rho from the line, with foot c(t)."""
        u = t + self.shift
        w = math.exp(u) * complex(math.tanh(rho), 1.0 / math.cosh(rho))
        return apply(self._g, w)

    def param_of(self, z: complex) -> float:
        """Parameter of the foot of z on the line."""
        return math.log(abs(self._std(z))) - self.shift

    def distance_to(self, z: complex) -> float:
        """Closed form arcsinh(|Re w| / Im w) after moving the line to the imaginary axis."""
        w = self._std(z)
        return math.asinh(abs(w.real) / w.imag)

    def endpoints(self):
        return (self.start, self.end)

    def same_line(self, other: "HGeodesic", tol: float = 1e-9) -> bool:
        def close(u, v):
            if u == INF or v == INF:
                return u == v
            return abs(u - v) <= tol * max(1.0, abs(u))

        return close(self.start, other.start) and close(self.end, other.end)


def hgeodesic_point(p: complex, q: complex, t: float) -> complex:
    """Point at arclength t along the segment from p to q."""
    _check(p)
    _check(q)
    if t == 0 or p == q:
        return p
    # disk model centred at p: phi(z) = (z - p) / (z - conj p)
    w = (q - p) / (q - p.conjugate())
    u = math.tanh(t / 2.0) * w / abs(w)
    return (p - p.conjugate() * u) / (1.0 - u)


def axis(m: MobiusMap) -> HGeodesic:
    """Axis of a hyperbolic map, oriented from repelling to attracting fixed point."""
    cls = classify(m)
    if cls.kind != "Hyperbolic":
        raise IsometryClassError(f"only hyperbolic maps have an axis, got {cls.kind}")
    return HGeodesic(*cls.fixed)


def collar_radius(ell: float, R: float) -> float:
    """Distance from the axis of the boundary of the Margulis domain M_R.

    For a hyperbolic map of length ell the displacement at axis distance rho is
    2 asinh(cosh(rho) sinh(ell/2)), minimal at the first power.
    """
    if R < ell:
        raise DomainError("M_R is empty when R < ell")
    return math.acosh(math.sinh(R / 2.0) / math.sinh(ell / 2.0))


def check_busemann_displacement(
    m: MobiusMap, ray: HGeodesic, T: float, delta: float = DELTA_HPLANE, n_samples: int = 101
) -> BoundReport:
    """Displacement of a parabolic map along a ray to its fixed point stays below 7 delta past T."""
    cls = classify(m)
    if cls.kind != "Parabolic":
        raise IsometryClassError(f"expected a parabolic map, got {cls.kind}")
    fp = cls.fixed[0]
    end = ray.end
    if not (fp == end or (fp != INF and end != INF and abs(fp - end) <= 1e-9 * max(1.0, abs(fp)))):
        raise DomainError(f"ray ends at {end!r} but the fixed point is {fp!r}")
    start_disp = hdistance(ray.point(0.0), apply(m, ray.point(0.0)))
    ts = [T + 10.0 * k / (n_samples - 1) for k in range(n_samples)]
    worst = max(hdistance(ray.point(t), apply(m, ray.point(t))) for t in ts)
    return BoundReport.make(
        "busemann_displacement",
        worst,
        7.0 * delta,
        "<=",
        anchor="d(c(t), g c(t)) <= 7 delta for t >= T",
        guard_met=T >= start_disp,
        inputs={"T": T, "delta": delta, "start_displacement": start_disp},
        tol=1e-9,
    )


def sample_box(rng, x0: float, x1: float, y0: float, y1: float) -> complex:
    return complex(rng.uniform(x0, x1), rng.uniform(y0, y1))


def matrix_list(maps: Sequence[MobiusMap]) -> list:
    return [m.text() for m in maps]
