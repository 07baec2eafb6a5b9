"""Ping-pong tests, displacement criteria for free semigroups, and an exact relation search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from gromolab import hplane
from gromolab.displacement import (
    Bracket,
    CayleyTranslation,
    IsometryHandle,
    MobiusIsometry,
    as_isometry,
)
from gromolab.hplane import HGeodesic, IsometryClassError, MobiusMap

MAX_ORACLE_LEN = 14
ORACLE_WORD_BUDGET = 20_000_000


class ElementaryPairError(ValueError):
    """The two maps share a boundary fixed point."""


class InapplicableError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


# --- ping-pong margins -------------------------------------------------------


def _pair_distance(a: IsometryHandle, b: IsometryHandle, p: int, q: int, x) -> float:
    """d(a^p x, b^q x)."""
    if isinstance(a, MobiusIsometry) and isinstance(b, MobiusIsometry):
        sm = hplane.scaled_mul(hplane.scaled_power(a.m, -p), hplane.scaled_power(b.m, q))
        return hplane.scaled_displacement(sm, x)
    if isinstance(a, CayleyTranslation) and isinstance(b, CayleyTranslation):
        sp = a.space
        x = sp.element(x)
        return sp.word_distance(sp.mul(a._pow(p), x), sp.mul(b._pow(q), x))
    raise TypeError("both isometries must act on the same backend")


def index_set(mode: str, P: int) -> list:
    if P < 1:
        raise ValueError("range P must be at least 1")
    ks = [k for k in range(-P, P + 1) if k]
    pairs = [(p, q) for p in ks for q in ks]
    if mode == "schottky":
        return pairs
    if mode == "demi-schottky":
        return [(p, q) for p, q in pairs if p > 0 or q > 0]
    raise ValueError(f"unknown ping-pong mode {mode!r}")


@dataclass
class PingPongReport:
    mode: str
    x: object
    P: int
    delta: float
    margins: dict  # (p, q) -> d(a^p x, b^q x) - max(d(x, a^p x), d(x, b^q x)) - 2 delta
    verdict: str  # "PASS-range" or "FAIL"
    witness: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS-range"

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "P": self.P,
            "delta": self.delta,
            "verdict": self.verdict,
            "witness": list(self.witness) if self.witness else None,
            "margins": [[p, q, m] for (p, q), m in self.margins.items()],
        }


def _ping_pong(mode, a, b, x, delta, P) -> PingPongReport:
    a, b = as_isometry(a, "a"), as_isometry(b, "b")
    margins = {}
    for p, q in index_set(mode, P):
        sep = _pair_distance(a, b, p, q, x)
        margins[(p, q)] = sep - max(a.power_displacement(x, p), b.power_displacement(x, q)) - 2 * delta
    worst = min(margins, key=lambda k: margins[k])
    if margins[worst] > 0:
        return PingPongReport(mode, x, P, delta, margins, "PASS-range")
    return PingPongReport(mode, x, P, delta, margins, "FAIL", worst)


def schottky_test(a, b, x, delta: float, P: int) -> PingPongReport:
    """Strict margins over all (p, q) with 0 < |p|, |q| <= P.  A pass is a finite-range statement."""
    return _ping_pong("schottky", a, b, x, delta, P)


def demi_schottky_test(a, b, x, delta: float, P: int) -> PingPongReport:
    """As schottky_test, skipping the pairs with p and q both negative."""
    return _ping_pong("demi-schottky", a, b, x, delta, P)


# --- certificates ------------------------------------------------------------


@dataclass
class FreenessCertificate:
    status: str  # CertifiedFreeSemigroup | CertifiedFreeGroup | RangeLimited | RelationFound
    pair: Optional[tuple] = None  # labels of the generating pair
    P: int = 0
    words: Optional[tuple] = None  # RelationFound witnesses
    trail: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "pair": list(self.pair) if self.pair else None,
            "P": self.P,
            "words": list(self.words) if self.words else None,
            "trail": self.trail,
        }


def _hyperbolic_pair(a, b):
    a, b = as_isometry(a, "a"), as_isometry(b, "b")
    if not (isinstance(a, MobiusIsometry) and isinstance(b, MobiusIsometry)):
        raise TypeError("the displacement criterion is implemented on the half-plane backend")
    ca, cb = a.classify(), b.classify()
    for g, c in ((a, ca), (b, cb)):
        if c.kind != "Hyperbolic":
            raise IsometryClassError(f"{g.label} is {c.kind}, expected hyperbolic")
    shared = [p for p in ca.fixed if any(_same_boundary(p, q) for q in cb.fixed)]
    if shared:
        raise ElementaryPairError(
            f"{a.label} and {b.label} share the boundary fixed point {shared[0]}; "
            "the pair generates an elementary group"
        )
    return a, b


def _same_boundary(p, q, tol=1e-9):
    if p == hplane.INF or q == hplane.INF:
        return p == q
    return abs(p - q) <= tol * max(1.0, abs(p), abs(q))


def _foot(line: HGeodesic, z: complex) -> complex:
    return line.point(line.param_of(z))


def axes_base_point(a: MobiusMap, b: MobiusMap, iters: int = 10_000) -> complex:
    """Midpoint of the closest pair of points on the two axes.

    Alternating projections converge to the crossing point, or to the feet of
    the common perpendicular when the axes are disjoint.
    """
    A, B = hplane.axis(a), hplane.axis(b)
    p = A.point(0.0)
    q = _foot(B, p)
    for _ in range(iters):
        p2 = _foot(A, q)
        q2 = _foot(B, p2)
        moved = hplane.hdistance(p, p2) + hplane.hdistance(q, q2)
        p, q = p2, q2
        if moved < 1e-14:
            break
    d = hplane.hdistance(p, q)
    return p if d == 0 else hplane.hgeodesic_point(p, q, d / 2)


def free_semigroup_by_displacement(a, b, delta: float, x=None, P: int = 3) -> FreenessCertificate:
    """Large-displacement criterion on the half-plane, where s = l exactly.

    When both lengths exceed 13 delta one of {a, b} and {a, b^-1} generates a
    free semigroup.  The finite demi-Schottky test picks which; if neither
    passes in range the answer is RangeLimited.
    """
    a, b = _hyperbolic_pair(a, b)
    la, lb = a.exact_length(), b.exact_length()
    trail = [{"criterion": "large displacement", "s_a": la, "s_b": lb, "threshold": 13 * delta}]
    if not min(la, lb) > 13 * delta:
        trail.append({"diagnostic": "s <= 13 delta; hypothesis not met"})
        return FreenessCertificate("RangeLimited", None, 0, trail=trail)
    if x is None:
        x = axes_base_point(a.m, b.m)
    binv = MobiusIsometry(b.m.inverse(), b.label + "^-1")
    for cand in (b, binv):
        rep = demi_schottky_test(a, cand, x, delta, P)
        trail.append({"pair": [a.label, cand.label], "demi_schottky": rep.verdict, "base": [x.real, x.imag],
                      "min_margin": min(rep.margins.values())})
        if rep.passed:
            return FreenessCertificate("CertifiedFreeSemigroup", (a.label, cand.label), P, trail=trail)
    trail.append({"note": "one of the two semigroups is free, but no finite test in range selects it"})
    return FreenessCertificate("RangeLimited", None, P, trail=trail)


def power_threshold(eps1: float, delta: float) -> int:
    """Smallest integer p with p * eps1 > 13 delta."""
    if not eps1 > 0:
        raise ValueError("eps1 must be positive")
    p = int(math.floor(13 * delta / eps1)) + 1
    # guard the floor against rounding right at an integer ratio
    while (p - 1) * eps1 > 13 * delta:
        p -= 1
    while not p * eps1 > 13 * delta:
        p += 1
    return p


def free_semigroup_powers(a, b, eps1: float, delta: float, x=None, P: int = 3):
    """(p_min, certificate) where the certificate concerns a^p_min and b^p_min."""
    p = power_threshold(eps1, delta)
    a, b = as_isometry(a, "a"), as_isometry(b, "b")
    for g in (a, b):
        ell = g.exact_length()
        if ell is not None and ell < eps1 - 1e-12:
            raise ValueError(f"l({g.label}) = {ell} is below eps1 = {eps1}")
    cert = free_semigroup_by_displacement(a.power(p), b.power(p), delta, x, P)
    cert.trail.insert(0, {"criterion": "powers", "p_min": p, "eps1": eps1, "delta": delta})
    return p, cert


def _size(br: Bracket, threshold: float) -> str:
    if br.lo > threshold:
        return "large"
    if br.hi <= threshold:
        return "small"
    return "ambiguous"


def margulis_free_dispatch(a, b, delta: float, L_est: float, bracket_a: Bracket, bracket_b: Bracket,
                           x=None, P: int = 3) -> FreenessCertificate:
    """Route a pair with large Margulis constant to the matching case of the free-subgroup theorem.

    Only the both-large case on the half-plane can certify (through the
    displacement criterion); other cases report finite-range tests.
    """
    if not L_est > 23 * delta:
        raise InapplicableError(f"Margulis constant estimate {L_est} does not exceed 23 delta = {23 * delta}")
    a, b = as_isometry(a, "a"), as_isometry(b, "b")
    sa, sb = _size(bracket_a, 13 * delta), _size(bracket_b, 13 * delta)
    trail = [{"L_estimate": L_est, "threshold": 23 * delta, "length_a": [bracket_a.lo, bracket_a.hi],
              "length_b": [bracket_b.lo, bracket_b.hi], "sizes": [sa, sb]}]
    if "ambiguous" in (sa, sb):
        trail.append({"diagnostic": "a length bracket straddles 13 delta; case undetermined"})
        return FreenessCertificate("RangeLimited", None, 0, trail=trail)
    if x is None:
        x = axes_base_point(a.m, b.m) if isinstance(a, MobiusIsometry) else a.space.identity()

    def inv(g):
        if isinstance(g, MobiusIsometry):
            return MobiusIsometry(g.m.inverse(), g.label + "^-1")
        return CayleyTranslation(g.space, g.space.inv(g.g), g.label + "^-1")

    def conj(g, h):  # g h g^-1
        if isinstance(g, MobiusIsometry):
            return MobiusIsometry(g.m @ h.m @ g.m.inverse(), f"{g.label}{h.label}{g.label}^-1")
        sp = g.space
        return CayleyTranslation(sp, sp.mul(sp.mul(g.g, h.g), sp.inv(g.g)), f"{g.label}{h.label}{g.label}^-1")

    if sa == "small" and sb == "small":
        trail.append({"case": "i", "candidate": "free group on {a, b}"})
        rep = schottky_test(a, b, x, delta, P)
        trail.append({"schottky": rep.verdict})
        return FreenessCertificate("RangeLimited", (a.label, b.label), P, trail=trail)
    if sa == "large" and sb == "large":
        trail.append({"case": "ii", "candidates": [[a.label, b.label], [a.label, b.label + "^-1"]]})
        if isinstance(a, MobiusIsometry):
            cert = free_semigroup_by_displacement(a, b, delta, x, P)
            cert.trail = trail + cert.trail
            return cert
        cands = [(a, b), (a, inv(b))]
    elif sb == "large":
        trail.append({"case": "iii"})
        cands = [(b, conj(a, b)), (b, conj(a, inv(b)))]
    else:
        trail.append({"case": "iv"})
        cands = [(a, conj(b, a)), (a, conj(b, inv(a)))]
    for g, h in cands:
        rep = demi_schottky_test(g, h, x, delta, P)
        trail.append({"pair": [g.label, h.label], "demi_schottky": rep.verdict})
        if rep.passed:
            return FreenessCertificate("RangeLimited", (g.label, h.label), P, trail=trail)
    return FreenessCertificate("RangeLimited", None, P, trail=trail)


# --- exact relation search -----------------------------------------------------


def _exact(m: MobiusMap):
    if not m.exact:
        raise ValueError("the relation oracle needs exact rational matrices")
    ents = m.entries
    if all(e.denominator == 1 for e in ents):
        return tuple(int(e) for e in ents)
    return tuple(ents)


def _mul(p, q):
    a, b, c, d = p
    e, f, g, h = q
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _key(m):
    for e in m:
        if e != 0:
            return m if e > 0 else tuple(-v for v in m)
    return m


def word_count(mode: str, max_len: int) -> int:
    if mode == "group":
        return 1 + sum(4 * 3 ** (n - 1) for n in range(1, max_len + 1))
    return sum(2**n for n in range(1, max_len + 1))


def relation_oracle(a: MobiusMap, b: MobiusMap, max_len: int, mode: str = "group"):
    """First pair of distinct words with equal matrices up to sign, or None.

    Group mode enumerates reduced words in a, A = a^-1, b, B = b^-1 (that
    order) including the empty word; semigroup mode enumerates nonempty
    positive words in a, b.  Words are visited in length-lex order and the
    first collision is returned as (earlier word, later word).
    """
    if mode not in ("group", "semigroup"):
        raise ValueError(f"mode must be 'group' or 'semigroup', got {mode!r}")
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    if max_len > MAX_ORACLE_LEN or word_count(mode, max_len) > ORACLE_WORD_BUDGET:
        raise BudgetError(f"max_len {max_len} exceeds the enumeration budget (at most {MAX_ORACLE_LEN})")
    ma, mb = _exact(a), _exact(b)
    if mode == "group":
        letters = {"a": ma, "A": _exact(a.inverse()), "b": mb, "B": _exact(b.inverse())}
        inverse = {"a": "A", "A": "a", "b": "B", "B": "b"}
        ident = (1, 0, 0, 1)
        seen = {_key(ident): ""}
        level = [("", ident)]
    else:
        letters = {"a": ma, "b": mb}
        inverse = {}
        seen, level = {}, [("", None)]
    for _ in range(max_len):
        nxt = []
        for w, m in level:
            for c, lm in letters.items():
                if w and inverse.get(w[-1]) == c:
                    continue
                w2 = w + c
                m2 = lm if m is None else _mul(m, lm)
                k = _key(m2)
                if k in seen:
                    return seen[k], w2
                seen[k] = w2
                nxt.append((w2, m2))
        level = nxt
    return None


def evaluate_word(a: MobiusMap, b: MobiusMap, w: str) -> MobiusMap:
    table = {"a": a, "A": a.inverse(), "b": b, "B": b.inverse()}
    out = MobiusMap.identity(a.exact and b.exact)
    for c in w:
        out = out @ table[c]
    return out


def relation_certificate(a: MobiusMap, b: MobiusMap, max_len: int, mode: str = "group") -> FreenessCertificate:
    hit = relation_oracle(a, b, max_len, mode)
    trail = [{"oracle": mode, "max_len": max_len}]
    if hit is None:
        return FreenessCertificate("RangeLimited", ("a", "b"), max_len, trail=trail)
    return FreenessCertificate("RelationFound", ("a", "b"), max_len, words=hit, trail=trail)


# --- attraction domains ---------------------------------------------------------


def attraction_membership(g, x, y, k_range: int, side: str = "+"):
    """Is y closer to some g^k x with k >= 1 (side '+') or k <= -1 (side '-') than to every other orbit point?

    Returns (member, k) where k is the minimizing power over [-k_range, k_range]
    (first in increasing k on ties).  Range-limited: powers beyond k_range are
    not examined.
    """
    if k_range < 1:
        raise ValueError("k_range must be at least 1")
    g = as_isometry(g)
    best, kb = None, 0
    for k in range(-k_range, k_range + 1):
        if isinstance(g, MobiusIsometry):
            # d(y, g^k x) = d(x, h^-1 g^k x) with h x = y
            sm = hplane.scaled_mul(hplane.scaled(_carry(x, y).inverse()), hplane.scaled_power(g.m, k))
            pt = hplane.scaled_displacement(sm, x)
        else:
            pt = g.distance(y, _cayley_power_point(g, k, x))
        if best is None or pt < best:
            best, kb = pt, k
    member = kb >= 1 if side == "+" else kb <= -1
    return member, kb


def _carry(x: complex, y: complex) -> MobiusMap:
    """An isometry sending x to y."""
    sx, sy = math.sqrt(x.imag), math.sqrt(y.imag)
    to_i = MobiusMap(1 / sx, -x.real / sx, 0.0, sx)
    from_i = MobiusMap(sy, y.real / sy, 0.0, 1 / sy)
    return from_i @ to_i


def _cayley_power_point(g: CayleyTranslation, k: int, x):
    sp = g.space
    return sp.mul(g._pow(k), sp.element(x))
