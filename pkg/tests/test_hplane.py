import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gromolab import hplane
from gromolab.displacement import random_hyperbolic
from gromolab.hplane import HGeodesic, MobiusMap, classify, hdistance

mpmath.mp.dps = 50

coords = st.floats(-20, 20, allow_nan=False)
heights = st.floats(1e-3, 1e3, allow_nan=False)
points = st.builds(complex, coords, heights)


def mp_distance(p, q):
    # cosh form evaluated at high precision, independent of the asinh form
    p, q = mpmath.mpc(p), mpmath.mpc(q)
    return float(mpmath.acosh(1 + abs(p - q) ** 2 / (2 * p.imag * q.imag)))


def test_distance_examples():
    assert hdistance(1j, 1j) == 0
    assert hdistance(1j, 2j) == pytest.approx(math.log(2), abs=1e-12)
    assert hdistance(1j, 1 + 1j) == pytest.approx(0.962423650119206, abs=1e-12)


@given(points, points)
def test_distance_matches_high_precision(p, q):
    assert hdistance(p, q) == pytest.approx(mp_distance(p, q), rel=1e-9, abs=1e-9)


def test_hpoint_rejects_boundary():
    with pytest.raises(hplane.DomainError):
        hplane.hpoint(0.0, 0.0)
    with pytest.raises(hplane.DomainError):
        hdistance(1j, 2.0 + 0j)


def test_apply_examples():
    assert hplane.apply(MobiusMap.identity(), 1j) == 1j
    assert hplane.apply(MobiusMap(2.0, 0.0, 0.0, 0.5), 1j) == pytest.approx(4j)
    assert hplane.apply(MobiusMap(1.0, 1.0, 0.0, 1.0), 1j) == pytest.approx(1 + 1j)


@settings(max_examples=50)
@given(points, points, st.integers(0, 2**32 - 1))
def test_mobius_maps_are_isometries(p, q, seed):
    g = random_hyperbolic(np.random.default_rng(seed))
    d0 = hdistance(p, q)
    assert hdistance(hplane.apply(g, p), hplane.apply(g, q)) == pytest.approx(d0, rel=1e-7, abs=1e-7)


def test_parse_matrix_exact_and_normalized():
    m = hplane.parse_matrix("-1,-2;0,-1")
    assert m.exact and m.entries == (1, 2, 0, 1)
    r = hplane.parse_matrix("2,1/3;0,1/2")
    assert r.exact and r.b == Fraction(1, 3)
    f = hplane.parse_matrix("2,0;0,0.5")
    assert f.trace() == pytest.approx(2.5)
    for bad in ("1,2;3", "a,b;c,d", "1,2;3,4", "0,0;0,0"):
        with pytest.raises(ValueError):
            hplane.parse_matrix(bad)


def test_classify_examples():
    c = classify(MobiusMap(1, 1, 0, 1))
    assert c.kind == "Parabolic" and c.fixed == (hplane.INF,)
    c = classify(MobiusMap(2.0, 0.0, 0.0, 0.5))
    assert c.kind == "Hyperbolic" and c.fixed == (0.0, hplane.INF)
    c = classify(MobiusMap(0, 1, -1, 0))
    assert c.kind == "Elliptic" and c.interior_fixed == pytest.approx(1j)
    assert classify(MobiusMap(-1, 0, 0, -1)).kind == "Identity"


def test_hyperbolic_fixed_points_are_ordered_repelling_first():
    m = MobiusMap(0.5, 0.0, 0.0, 2.0)  # z -> z / 4, attracting at 0
    assert classify(m).fixed == (hplane.INF, 0.0)


def test_closed_form_length_examples():
    assert hplane.closed_form_length(MobiusMap(2.0, 0.0, 0.0, 0.5)) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert hplane.closed_form_length(MobiusMap.diag(math.e)) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(hplane.IsometryClassError):
        hplane.closed_form_length(MobiusMap(1, 1, 0, 1))


def test_closed_form_length_against_long_iterate():
    m = MobiusMap(2.0, 0.0, 0.0, 0.5)
    n = 2**20
    assert hplane.power_displacement(m, 1j, n) / n == pytest.approx(2 * math.log(2), abs=1e-9)


@pytest.mark.parametrize("n", [1, 7, 64, 500, 4000])
def test_power_displacement_matches_mpmath(n):
    m = hplane.parse_matrix("2,1;1,1")
    x = 0.3 + 0.7j
    # Im(M^n z) shrinks like e^(-n l), so the precision has to grow with n
    with mpmath.workdps(50 + n):
        M = mpmath.matrix([[2, 1], [1, 1]]) ** n
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        z = mpmath.mpc(0.3, 0.7)
        w = (a * z + b) / (c * z + d)
        want = float(mpmath.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag)))
    assert hplane.power_displacement(m, x, n) == pytest.approx(want, rel=1e-10)


def test_axis_examples():
    ax = hplane.axis(MobiusMap(2.0, 0.0, 0.0, 0.5))
    assert set(ax.endpoints()) == {0.0, hplane.INF}
    # trace 2 cosh(1), fixed points -1 and 1
    ch, sh = math.cosh(0.5), math.sinh(0.5)
    circ = hplane.axis(MobiusMap(ch, sh, sh, ch))
    assert sorted(circ.endpoints()) == pytest.approx([-1.0, 1.0])
    assert abs(circ.point(0.3)) == pytest.approx(1.0)
    t = MobiusMap(1.0, 1.0, 0.0, 1.0)
    conj = t @ MobiusMap.diag(2.0) @ t.inverse()
    assert set(hplane.axis(conj).endpoints()) == {1.0, hplane.INF}


@given(points, points, st.floats(-5, 5), st.floats(-5, 5))
def test_geodesic_is_unit_speed(p, q, s, t):
    if hdistance(p, q) < 1e-6:
        return
    g = HGeodesic.through(p, q)
    assert hdistance(g.point(s), g.point(t)) == pytest.approx(abs(s - t), abs=1e-7)


@given(points, points)
def test_geodesic_through_contains_both(p, q):
    if hdistance(p, q) < 1e-6:
        return
    g = HGeodesic.through(p, q)
    assert g.distance_to(p) < 1e-7 and g.distance_to(q) < 1e-7


@given(st.floats(-3, 3), st.floats(-4, 4))
def test_offset_point_distance(t, rho):
    g = HGeodesic(-1.0, 2.0)
    z = g.offset_point(t, rho)
    assert g.distance_to(z) == pytest.approx(abs(rho), abs=1e-9)
    assert g.param_of(z) == pytest.approx(t, abs=1e-7)


def test_hgeodesic_point_matches_line():
    p, q = 0.5 + 2j, -1 + 0.3j
    L = hdistance(p, q)
    for t in (0.0, 0.3, L / 2, L):
        z = hplane.hgeodesic_point(p, q, t)
        assert hdistance(p, z) == pytest.approx(t, abs=1e-9)
        assert hdistance(z, q) == pytest.approx(L - t, abs=1e-9)


def test_collar_radius():
    want = float(mpmath.acosh(mpmath.sinh(1) / mpmath.sinh(0.5)))
    assert hplane.collar_radius(1.0, 2.0) == pytest.approx(want, abs=1e-12)
    assert hplane.collar_radius(1.0, 2.0) == pytest.approx(1.4531764193945709, abs=1e-12)


def test_busemann_displacement_example():
    ray = HGeodesic(0.0, hplane.INF)
    m = MobiusMap(1, 1, 0, 1)
    assert hdistance(ray.point(0.0), hplane.apply(m, ray.point(0.0))) == pytest.approx(math.acosh(1.5), abs=1e-12)
    rep = hplane.check_busemann_displacement(m, ray, 1.0, math.log(3), 50)
    assert rep.holds and rep.guard_met
    assert rep.lhs == pytest.approx(math.acosh(1 + math.exp(-2) / 2), abs=1e-9)
    with pytest.raises(hplane.DomainError):
        hplane.check_busemann_displacement(m, HGeodesic(hplane.INF, 0.0), 1.0)


def test_large_powers_do_not_overflow():
    m = MobiusMap.diag(math.exp(15.0))
    d = hplane.power_displacement(m, 1 + 1j, 10**6)
    # |z| / Im z = sqrt 2 at z = 1 + i, so d = L + ln 2 up to e^-L
    assert d == pytest.approx(30e6 + math.log(2), abs=1e-6)
