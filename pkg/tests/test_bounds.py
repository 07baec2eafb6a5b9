import decimal
import math

import pytest

from gromolab import bounds as b
from gromolab.bounds import BGTFunction, BoundDomainError

LN2, LN3 = math.log(2), math.log(3)
ALPHA = math.acosh(2)


def test_n_one():
    assert b.n_one(LN3, ALPHA) == 11  # 13 ln 3 / arccosh 2 = 10.84...
    assert b.n_one(0.0, 1.0) == 1
    assert b.n_one(1.0, 13.0) == 2  # the floor is taken on an exact integer ratio
    with pytest.raises(BoundDomainError):
        b.n_one(1.0, 0.0)


def test_entropy_lower_values():
    assert b.entropy_lower_cocompact(0, 1, 0)[0] == pytest.approx(LN2 / 4)
    assert b.entropy_lower_cocompact(1, 1, 12)[0] == pytest.approx(LN2 / 30)
    assert b.entropy_lower_cocompact(0, 1, 0)[1] == pytest.approx(LN2 / 16)
    assert b.entropy_lower_group(0) == pytest.approx(LN2 / 16)
    assert b.entropy_lower_group(1) == pytest.approx(LN2 / 42)
    with pytest.raises(BoundDomainError):
        b.entropy_lower_cocompact(0, 0, 0)
    with pytest.raises(BoundDomainError):
        b.entropy_lower_group(-1)


@pytest.mark.parametrize("delta,D", [(0.0, 0.5), (0.3, 1.0), (2.0, 3.0)])
def test_cocompact_value_dominates_simplified_for_short_lengths(delta, D):
    for L in (0.0, 6 * (D + delta), 12 * (D + delta)):
        full, simple = b.entropy_lower_cocompact(delta, D, L)
        assert full >= simple - 1e-15


def test_tits_thresholds():
    t = b.tits_dichotomy(1.0, 1.0)
    assert t.M0 == 720
    assert t.entropy == pytest.approx(1 / 750)
    want = 720 * 3.0**-34 * math.exp(-2880 / 29)
    assert t.length == pytest.approx(want, rel=1e-9)
    assert t.log_length == pytest.approx(math.log(want), rel=1e-12)
    assert b.tits_dichotomy(1.0, 100.0).M0 == 2040
    assert b.tits_dichotomy(2.0, 0.0).M0 == 720
    assert b.tits_dichotomy(1.0, 1e6).log_length < -1e6
    with pytest.raises(BoundDomainError):
        b.tits_dichotomy(0.0, 1.0)


def test_packing_argument_is_exact():
    assert b.packing_argument(1.0, 0.0, 1.0) == 3**12 + 1
    v = b.packing_argument(0.0, 1.0, 1.0)
    # 3^12 e^490 has about 219 digits; the decimal module gives an independent exact floor
    with decimal.localcontext() as ctx:
        ctx.prec = 300
        want = int((decimal.Decimal(3**12) * decimal.Decimal(490).exp()).to_integral_value(decimal.ROUND_FLOOR)) + 1
    assert v == want
    assert math.log(v) == pytest.approx(12 * LN3 + 490, rel=1e-15)
    with pytest.raises(BoundDomainError):
        b.packing_argument(1.0, 1e6, 1e6)


def test_margulis_constants_mock():
    mc = b.margulis_constants(1.0, 0.0, 1.0, BGTFunction.constant(100))
    assert (mc.R0, mc.N0, mc.eps0) == (60, 100, pytest.approx(0.6))
    assert mc.log_s0 == pytest.approx(LN2 - 12 * LN3 - 165 + math.log(60))
    assert mc.s0 == pytest.approx(2 * 3.0**-12 * math.exp(-165) * 60)
    assert mc.argument == 3**12 + 1
    with pytest.raises(BoundDomainError):
        b.margulis_constants(0.0, 0.0, 0.0, BGTFunction.constant(1))


def test_margulis_constants_receive_big_integer():
    seen = []

    def N(p):
        seen.append(p)
        return 7 if p > 10**200 else 1

    mc = b.margulis_constants(0.0, 1.0, 1.0, BGTFunction(N))
    assert isinstance(seen[0], int) and seen[0] > 10**200
    assert mc.N0 == 7 and mc.eps0 == pytest.approx(20 / 7)


def test_margulis_constants_antitone_in_N():
    prev = None
    for n in (1, 2, 10, 1000):
        mc = b.margulis_constants(0.5, 0.2, 1.0, BGTFunction.constant(n))
        if prev:
            assert mc.eps0 <= prev.eps0 and mc.log_s0 <= prev.log_s0
        prev = mc


def test_bgt_function_guards():
    N = BGTFunction(lambda p: p)
    assert N(3) == 3 and N(5) == 5
    bad = BGTFunction(lambda p: 10 - p)
    bad(1)
    with pytest.raises(BoundDomainError):
        bad(2)
    with pytest.raises(BoundDomainError):
        BGTFunction(lambda p: 0)(1)
    with pytest.raises(BoundDomainError):
        N(0)
    assert BGTFunction(lambda p: 2.0)(4) == 2


def test_collar_and_systole_values():
    assert b.collar_lower(LN3, ALPHA, 1.0, 0.01) == pytest.approx(math.log(100 / 11) / 11, abs=1e-12)
    assert b.collar_lower(LN3, ALPHA, 1.0, 0.01) == pytest.approx(0.2007, abs=1e-4)
    assert b.collar_lower(LN3, ALPHA, 1.0, 5.0) == pytest.approx(LN2 / 11)
    assert b.systole_global_lower(LN3, ALPHA, 1.0, 1.0) == pytest.approx(math.exp(-22) / 11)
    assert b.systole_global_lower(LN3, ALPHA, 1.0, 0.0) == pytest.approx(1 / 11)
    with pytest.raises(BoundDomainError):
        b.collar_lower(LN3, ALPHA, 1.0, 0.0)


def test_collar_is_nonincreasing_in_systole():
    grid = [10.0**k for k in range(-8, 3)]
    vals = [b.collar_lower(LN3, ALPHA, 1.0, s) for s in grid]
    assert all(u >= v for u, v in zip(vals, vals[1:]))
    assert vals[0] > 10 * vals[-1]


def test_systole_decreasing_in_diameter():
    vals = [b.systole_global_lower(0.5, 1.0, 0.7, D) for D in (0, 0.5, 1, 2, 4)]
    assert all(u > v > 0 for u, v in zip(vals, vals[1:]))


def test_diastole_values():
    assert b.diastole_lower(LN3, ALPHA, 1.0) == pytest.approx(LN2 / 11)
    assert b.diastole_lower(1.0, 13.0, 3.0) == pytest.approx(LN2 / 6)
    assert b.diastole_lower(1.0, 14.0, 3.0) == pytest.approx(LN2 / 3)
    assert b.diastole_lower(LN3, ALPHA, 2.0) == pytest.approx(b.diastole_lower(LN3, ALPHA, 1.0) / 2)


def test_tube_radii():
    eps0, R = b.tube_radii(LN3, ALPHA, 1.0, 0.04)
    assert eps0 == pytest.approx(ALPHA / (2 * (13 * LN3 + ALPHA)))
    assert eps0 == pytest.approx(0.042213, abs=1e-6)
    _, R = b.tube_radii(LN3, ALPHA, 1.0, eps0)
    assert R == pytest.approx(eps0 * LN2) and R == pytest.approx(0.02926, abs=1e-5)
    _, R = b.tube_radii(LN3, ALPHA, 1.0, eps0 / math.e)
    assert R == pytest.approx(eps0 * (1 + LN2))
    with pytest.raises(BoundDomainError):
        b.tube_radii(LN3, ALPHA, 1.0, 0.05)


def test_ht_constant():
    assert b.ht_constant_from_acylindrical(1.0, 19) == pytest.approx(1.0)
    assert b.ht_constant_from_acylindrical(0.0, 5) == 0
    assert b.ht_constant_from_acylindrical(1.0, 10**9) < 1e-7


@pytest.mark.parametrize("fn,args", [
    (b.entropy_lower_group, (0.7,)),
    (lambda *a: b.entropy_lower_cocompact(*a)[0], (0.7, 1.2, 3.0)),
    (b.diastole_lower, (0.7, 0.3, 1.5)),
    (b.systole_global_lower, (0.7, 0.3, 1.5, 2.0)),
])
def test_catalog_is_positive_and_antitone(fn, args):
    # every formula here decreases (weakly) as any single parameter other than alpha grows
    base = fn(*args)
    assert base > 0
    for i in range(len(args)):
        if fn is b.diastole_lower and i == 1 or fn is b.systole_global_lower and i == 1:
            continue
        bumped = list(args)
        bumped[i] *= 1.5
        assert fn(*bumped) <= base


def test_named_checks():
    rep = b.check_named_bound("entropy_lower_group", delta=0.0, entropy=LN3)
    assert rep.holds and rep.rhs == pytest.approx(LN2 / 16)
    assert not b.check_named_bound("entropy_lower_group", delta=0.0, entropy=0.01).holds
    rep = b.check_named_bound("cocompact_doubling", ratio=100.0, R=5.0, H=1.0, D=1.0, delta=0.0)
    assert rep.holds and not rep.guard_met
    rep = b.check_named_bound("free_semigroup_power", delta=LN3, eps1=ALPHA, p=11)
    assert rep.holds and rep.strict
    assert not b.check_named_bound("free_semigroup_power", delta=LN3, eps1=ALPHA, p=10).holds
    rep = b.check_named_bound("tits_length", delta=1.0, D=1.0, length=1.0)
    assert rep.holds and "consistent" in rep.anchor


def test_named_check_errors():
    with pytest.raises(KeyError):
        b.check_named_bound("no_such_bound", delta=1.0)
    with pytest.raises(BoundDomainError):
        b.check_named_bound("diastole", delta=1.0)


def test_catalog_entries_evaluate():
    out = b.CATALOG["margulis_constants"]({"delta": 1, "H": 0, "D": 1, "N": 100})
    assert out["R0"] == 60 and out["eps0"] == pytest.approx(0.6)
    out = b.CATALOG["collar_lower"]({"delta": LN3, "alpha": ALPHA, "H": 1, "sys": 0.01})
    assert out["N1"] == 11
    assert b.CATALOG["ht_constant"]({"delta": 1, "N": 19})["value"] == pytest.approx(1)
