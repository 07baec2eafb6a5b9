"""Explicit constants and universal inequalities, as plain functions.

Integer parts [t] are floors.  Every check records its direction and
whether the inequality is strict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from gromolab.report import BoundReport

LN2 = math.log(2.0)
# decimal digits beyond which the packing-count argument is refused
MAX_ARG_DIGITS = 1_000_000


class BoundDomainError(ValueError):
    pass


def _pos(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise BoundDomainError(f"{k} must be positive, got {v!r}")


def _nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise BoundDomainError(f"{k} must be nonnegative, got {v!r}")


def n_one(delta: float, alpha: float) -> int:
    """1 + [13 delta / alpha]."""
    _pos(alpha=alpha)
    _nonneg(delta=delta)
    return 1 + int(math.floor(13 * delta / alpha))


# --- entropy lower bounds -----------------------------------------------------


def entropy_lower_cocompact(delta: float, D: float, L: float):
    """(ln 2 / (L + 14 delta + 4 D), ln 2 / (16 D + 26 delta))."""
    _nonneg(delta=delta, D=D, L=L)
    den, simple = L + 14 * delta + 4 * D, 16 * D + 26 * delta
    if den == 0 or simple == 0:
        raise BoundDomainError("denominator vanishes")
    return LN2 / den, LN2 / simple


def entropy_lower_group(delta: float) -> float:
    _nonneg(delta=delta)
    return LN2 / (26 * delta + 16)


@dataclass
class TitsThresholds:
    entropy: float  # 1 / (750 delta)
    length: float  # may underflow to 0.0 for huge M0; log_length stays exact
    log_length: float
    M0: float

    def __iter__(self):
        return iter((self.entropy, self.length))


def tits_dichotomy(delta: float, D: float) -> TitsThresholds:
    """Entropy 1/(750 delta) and length 3^-34 delta M0 e^(-4 M0 / 29), M0 = max(20 (D/delta + 2), 720)."""
    if not delta > 0:
        raise BoundDomainError("delta must be positive")
    _nonneg(D=D)
    M0 = max(20 * (D / delta + 2), 720.0)
    log_len = -34 * math.log(3) + math.log(delta) + math.log(M0) - 4 * M0 / 29
    return TitsThresholds(1 / (750 * delta), math.exp(log_len), log_len, M0)


# --- Margulis constants ----------------------------------------------------------


class BGTFunction:
    """User-supplied nondecreasing map p -> N(p) >= 1 on positive integers.

    Monotonicity is checked on every pair of queried values.
    """

    def __init__(self, fn: Callable[[int], int], name: str = "N"):
        self.fn, self.name = fn, name
        self.queried: dict = {}

    @classmethod
    def constant(cls, value: int) -> "BGTFunction":
        return cls(lambda p: value, f"N={value}")

    def __call__(self, p: int) -> int:
        if not (isinstance(p, int) and p >= 1):
            raise BoundDomainError(f"{self.name} is defined on positive integers, got {p!r}")
        v = self.fn(p)
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        if not (isinstance(v, int) and v >= 1):
            raise BoundDomainError(f"{self.name}({p}) must be a positive integer, got {v!r}")
        for q, w in self.queried.items():
            if (q <= p and w > v) or (q >= p and w < v):
                raise BoundDomainError(f"{self.name} is not monotone: N({q}) = {w}, N({p}) = {v}")
        self.queried[p] = v
        return v


def packing_argument(delta: float, H: float, D: float) -> int:
    """[3^12 e^(490 H (D + 2 delta))] + 1 as an exact integer."""
    expo = 490 * H * (D + 2 * delta)
    digits = int(expo / math.log(10)) + 8
    if digits > MAX_ARG_DIGITS:
        raise BoundDomainError(f"argument has about {digits} digits; too large to materialize")
    with mpmath.workdps(digits + 20):
        val = mpmath.mpf(3) ** 12 * mpmath.exp(mpmath.mpf(490) * mpmath.mpf(H) * (mpmath.mpf(D) + 2 * mpmath.mpf(delta)))
        return int(mpmath.floor(val)) + 1


@dataclass
class MargulisConstants:
    R0: float
    N0: int
    eps0: float
    s0: float  # underflows to 0.0 for large N0; log_s0 stays exact
    log_s0: float
    argument: int = field(repr=False, default=0)

    def __iter__(self):
        return iter((self.R0, self.N0, self.eps0, self.s0))


def margulis_constants(delta: float, H: float, D: float, N: BGTFunction) -> MargulisConstants:
    """R0 = 20 (D + 2 delta), N0 = N([3^12 e^(490 H (D + 2 delta))] + 1), eps0 = R0 / N0,
    s0 = 2 3^-12 e^(-(N0 + 10)(13 H R0 + 3) / 2) R0."""
    _nonneg(delta=delta, H=H, D=D)
    R0 = 20 * (D + 2 * delta)
    if R0 == 0:
        raise BoundDomainError("R0 = 20 (D + 2 delta) vanishes")
    if not isinstance(N, BGTFunction):
        N = BGTFunction(N)
    arg = packing_argument(delta, H, D)
    N0 = N(arg)
    log_s0 = math.log(2) - 12 * math.log(3) - 0.5 * (N0 + 10) * (13 * H * R0 + 3) + math.log(R0)
    return MargulisConstants(R0, N0, R0 / N0, math.exp(log_s0), log_s0, arg)


# --- systoles and collars --------------------------------------------------------


def collar_lower(delta: float, alpha: float, H: float, sys: float) -> float:
    """(1 / (N1 H)) max(ln 2, ln(1 / (N1 H sys))) with N1 = 1 + [13 delta / alpha]."""
    _pos(alpha=alpha, H=H, sys=sys)
    n1 = n_one(delta, alpha)
    return max(LN2, math.log(1 / (n1 * H * sys))) / (n1 * H)


def systole_global_lower(delta: float, alpha: float, H: float, D: float) -> float:
    _pos(alpha=alpha, H=H)
    _nonneg(D=D)
    n1 = n_one(delta, alpha)
    return math.exp(-2 * n1 * H * D) / (n1 * H)


def diastole_lower(delta: float, alpha: float, H: float) -> float:
    """eps1 = ln 2 / (H ([13 delta / alpha] + 1))."""
    _pos(alpha=alpha, H=H)
    return LN2 / (H * n_one(delta, alpha))


def tube_radii(delta: float, alpha: float, H: float, eps: float):
    """(eps0, R_eps) with eps0 = alpha / (2 H (13 delta + alpha)) and R_eps = eps0 ln(2 eps0 / eps)."""
    _pos(alpha=alpha, H=H, eps=eps)
    _nonneg(delta=delta)
    eps0 = alpha / (2 * H * (13 * delta + alpha))
    if eps > eps0 * (1 + 1e-12):
        raise BoundDomainError(f"eps = {eps} exceeds eps0 = {eps0}")
    return eps0, eps0 * math.log(2 * eps0 / eps)


def ht_constant_from_acylindrical(delta: float, N_20delta: int) -> float:
    """21 delta / (N(20 delta) + 2)."""
    _nonneg(delta=delta, N_20delta=N_20delta)
    return 21 * delta / (N_20delta + 2)


# --- named checks ----------------------------------------------------------------------


def _req(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise BoundDomainError(f"missing parameters: {', '.join(missing)}")
    return [float(params[n]) for n in names]


def _check_entropy_group(p):
    delta, ent = _req(p, "delta", "entropy")
    return BoundReport.make("entropy_lower_group", ent, entropy_lower_group(delta), ">=",
                            anchor="Ent >= ln 2 / (26 delta + 16) for non-elementary groups", inputs=p)


def _check_entropy_cocompact(p):
    delta, D, L, ent = _req(p, "delta", "D", "L", "entropy")
    return BoundReport.make("entropy_lower_cocompact", ent, entropy_lower_cocompact(delta, D, L)[0], ">=",
                            anchor="Ent >= ln 2 / (L + 14 delta + 4 D)", inputs=p)


def _check_tits_entropy(p):
    delta, ent = _req(p, "delta", "entropy")
    return BoundReport.make("tits_entropy", ent, tits_dichotomy(delta, 0.0).entropy, ">=", strict=True,
                            anchor="consistent with the entropy branch: Ent > 1 / (750 delta)", inputs=p)


def _check_tits_length(p):
    delta, D, length = _req(p, "delta", "D", "length")
    return BoundReport.make("tits_length", length, tits_dichotomy(delta, D).length, ">=",
                            anchor="consistent with the length branch: l >= 3^-34 delta M0 e^(-4 M0 / 29)", inputs=p)


def _check_cocompact_doubling(p):
    ratio, R, H, D, delta = _req(p, "ratio", "R", "H", "D", "delta")
    return BoundReport.make("cocompact_doubling", ratio, 81 * math.exp(6.5 * H * R), "<=",
                            anchor="count(2R) / count(R) <= 3^4 e^(13 H R / 2) for R >= 10 (D + 2 delta)",
                            guard_met=R >= 10 * (D + 2 * delta), inputs=p)


def _check_collar(p):
    delta, alpha, H, sys, disp = _req(p, "delta", "alpha", "H", "sys", "displacement")
    return BoundReport.make("collar", disp, collar_lower(delta, alpha, H, sys), ">=", strict=True,
                            anchor="elements not commuting with a systolic one displace by more than the collar bound",
                            inputs=p)


def _check_systole_global(p):
    delta, alpha, H, D, sys = _req(p, "delta", "alpha", "H", "D", "systole")
    return BoundReport.make("systole_global", sys, systole_global_lower(delta, alpha, H, D), ">=",
                            anchor="Sys >= e^(-2 N1 H D) / (N1 H)", inputs=p)


def _check_diastole(p):
    delta, alpha, H, dias = _req(p, "delta", "alpha", "H", "diastole")
    return BoundReport.make("diastole", dias, diastole_lower(delta, alpha, H), ">=",
                            anchor="Dias >= ln 2 / (H ([13 delta / alpha] + 1))", inputs=p)


def _check_free_semigroup_power(p):
    delta, eps1, power = _req(p, "delta", "eps1", "p")
    return BoundReport.make("free_semigroup_power", power * eps1, 13 * delta, ">=", strict=True,
                            anchor="p eps1 > 13 delta", inputs=p)


NAMED_CHECKS = {
    "entropy_lower_group": _check_entropy_group,
    "entropy_lower_cocompact": _check_entropy_cocompact,
    "tits_entropy": _check_tits_entropy,
    "tits_length": _check_tits_length,
    "cocompact_doubling": _check_cocompact_doubling,
    "collar": _check_collar,
    "systole_global": _check_systole_global,
    "diastole": _check_diastole,
    "free_semigroup_power": _check_free_semigroup_power,
}


def check_named_bound(name: str, **params) -> BoundReport:
    try:
        fn = NAMED_CHECKS[name]
    except KeyError:
        raise KeyError(f"unknown bound {name!r}; known: {', '.join(sorted(NAMED_CHECKS))}") from None
    return fn(params)


def _mc_dict(mc: MargulisConstants) -> dict:
    return {"R0": mc.R0, "N0": mc.N0, "eps0": mc.eps0, "s0": mc.s0, "log_s0": mc.log_s0}


# formula evaluations exposed by name (for the command line)
CATALOG = {
    "entropy_lower_cocompact": lambda p: dict(zip(("value", "simplified"),
                                                  entropy_lower_cocompact(*_req(p, "delta", "D", "L"))))
    ,
    "entropy_lower_group": lambda p: {"value": entropy_lower_group(*_req(p, "delta"))},
    "tits_dichotomy": lambda p: (lambda t: {"entropy": t.entropy, "length": t.length, "log_length": t.log_length,
                                            "M0": t.M0})(tits_dichotomy(*_req(p, "delta", "D"))),
    "margulis_constants": lambda p: _mc_dict(margulis_constants(
        *_req(p, "delta", "H", "D"), BGTFunction.constant(int(_req(p, "N")[0])))),
    "collar_lower": lambda p: {"value": collar_lower(*_req(p, "delta", "alpha", "H", "sys")),
                               "N1": n_one(*_req(p, "delta", "alpha"))},
    "systole_global_lower": lambda p: {"value": systole_global_lower(*_req(p, "delta", "alpha", "H", "D"))},
    "diastole_lower": lambda p: {"value": diastole_lower(*_req(p, "delta", "alpha", "H"))},
    "tube_radii": lambda p: dict(zip(("eps0", "R_eps"), tube_radii(*_req(p, "delta", "alpha", "H", "eps")))),
    "ht_constant": lambda p: {"value": ht_constant_from_acylindrical(*_req(p, "delta", "N"))},
}
