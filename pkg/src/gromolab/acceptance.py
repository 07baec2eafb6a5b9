"""The acceptance suite, shared by ``gromolab verify`` and the tests.

Each criterion returns a plain dict: id, title, passed, details.  Nothing
time-dependent goes into the dict, so repeated runs serialize identically.
"""
from __future__ import annotations

import math
import numpy as np

from gromolab import bounds, displacement as disp, entropy_doubling as ed, freeness, hplane
from gromolab.graph_space import CayleySpace
from gromolab.hplane import MobiusMap
from gromolab.metric_core import box_sampler, four_point_delta, half_plane
from gromolab.serialize import dumps

LN3 = math.log(3.0)
LN2 = math.log(2.0)


def _result(cid, title, passed, **details):
    return {"id": cid, "title": title, "passed": bool(passed), "details": details}


def _reports(rs):
    return [r.as_dict() for r in rs]


def tree_delta(seed=0):
    F = CayleySpace.parse("free:2")
    pool = F.ball("", 6)
    est = four_point_delta(F.handle(), pool, 1000, seed)
    return _result(1, "four-point delta of the free group tree", est.value == 0,
                   value=est.value, quadruples=est.quadruple_count, seed=seed)


def plane_delta(seed=0):
    est = four_point_delta(half_plane(), box_sampler(-5, 5, 0.1, 10), 10_000, seed)
    bound = LN3 + 1e-9
    return _result(2, "four-point delta of the half-plane box", est.value <= bound,
                   value=est.value, bound=bound, quadruples=est.quadruple_count, seed=seed)


def _matrices(seed, n=50):
    rng = np.random.default_rng(seed)
    return [disp.random_hyperbolic(rng) for _ in range(n)]


def translation_length(seed=0):
    worst_width, misses, grid_err = 0.0, 0, 0.0
    for m in _matrices(seed):
        ell = hplane.closed_form_length(m)
        br = disp.stable_length_bracket(m, 1j, 1024, LN3)
        worst_width = max(worst_width, br.width)
        misses += not br.contains(ell, 1e-9)
        md = disp.min_displacement(m, disp.axis_grid(m) + [1j])
        grid_err = max(grid_err, abs(md.value - ell))
    ok = misses == 0 and worst_width <= 0.06 and grid_err <= 1e-6
    return _result(3, "stable length brackets and minimal displacement", ok, matrices=50,
                   bracket_misses=misses, worst_width=worst_width, worst_grid_error=grid_err, seed=seed)


def power_growth(seed=0):
    rng = np.random.default_rng(seed + 1)
    growth_bad = quasi_bad = 0
    worst = -math.inf
    for m in _matrices(seed):
        x = complex(rng.uniform(-2, 2), rng.uniform(0.5, 2))
        br = disp.stable_length_bracket(m, x, 1024, LN3)
        rep = disp.check_power_growth(m, x, br, LN3)
        worst = max(worst, rep.lhs)
        growth_bad += not rep.holds
        s_est = disp.min_displacement(m, disp.axis_grid(m) + [x]).value
        quasi_bad += not (br.lo <= s_est + 1e-9 and s_est <= br.hi + LN3 + 1e-9)
    return _result(4, "power growth and minimal displacement against the bracket",
                   growth_bad == 0 and quasi_bad == 0, pairs=50, growth_violations=growth_bad,
                   quasigeod_violations=quasi_bad, worst_growth_margin=worst, seed=seed)


def free_group_entropy(seed=0):
    F = CayleySpace.parse("free:2")
    spheres = F.sphere_counts_bfs("", 12)
    counts = [sum(spheres[: R + 1]) for R in range(13)]
    exact = all(c == 2 * 3**R - 1 for R, c in enumerate(counts))
    prof = ed.growth_profile(F, range(13))
    slope_ok = abs(prof.slope_estimate - LN3) <= 1e-3
    rep = bounds.check_named_bound("entropy_lower_group", delta=0.0, entropy=prof.slope_estimate)
    return _result(5, "growth of the free group", exact and slope_ok and rep.holds, counts=counts,
                   slope_estimate=prof.slope_estimate, last_point_estimate=prof.last_point_estimate,
                   reports=_reports([rep]))


def doubling(seed=0):
    F, Z = CayleySpace.parse("free:2"), CayleySpace.parse("abelian:1")
    reps = [ed.check_cocompact_doubling(F, R, LN3, 1.0, 0.0) for R in range(10, 15)]
    guards = all(r.guard_met for r in reps)
    sand = ed.check_packing_doubling_sandwich(F, "", 2, 5) + ed.check_packing_doubling_sandwich(Z, (0,), 2, 5)
    sub = ed.check_subgroup_doubling(F, "", ["a"], 2, 4)
    allr = reps + sand + [sub]
    ok = guards and all(r.holds for r in allr) and sub.guard_met
    return _result(6, "doubling, packing sandwich and subgroup doubling", ok,
                   packing_free=ed.packing_number(F, "", 2, 5), packing_z=ed.packing_number(Z, (0,), 2, 5),
                   reports=_reports(allr))


def margulis_domains(seed=0):
    g = MobiusMap.diag(math.exp(0.5))
    R = 2.0
    agree = disp.collar_agreement(g, R, 1000, seed)
    tube = disp.check_tube(g, R, LN3, 1000, seed)
    ax = hplane.axis(g)
    rng = np.random.default_rng(seed + 7)
    axis_reps = [disp.check_distance_to_axis(g, complex(rng.uniform(-3, 3), rng.uniform(0.2, 4)), LN3)
                 for _ in range(20)]
    ell = hplane.closed_form_length(g)
    sep = [disp.check_domain_separation(g, ell, R, ax.offset_point(t, hplane.collar_radius(ell, R) + extra))
           for t, extra in ((0.0, 0.0), (0.3, 0.5), (0.7, 3.0))]
    allr = [tube] + axis_reps + sep
    ok = agree["disagree"] == 0 and all(r.holds for r in allr) and tube.guard_met
    return _result(7, "Margulis domain of a length-one map", ok, collar_radius=hplane.collar_radius(ell, R),
                   agreement=agree, reports=_reports(allr))


def sanov():
    return hplane.parse_matrix("1,2;0,1"), hplane.parse_matrix("1,0;2,1")


def _direct_margin(a, b, p, q, x, delta):
    ap, bq = (a**p).as_float(), (b**q).as_float()
    u, v = hplane.apply(ap, x), hplane.apply(bq, x)
    return hplane.hdistance(u, v) - max(hplane.hdistance(x, u), hplane.hdistance(x, v)) - 2 * delta


def freeness_checks(seed=0):
    a, b = sanov()
    none2 = freeness.relation_oracle(a, b, 10, "group")
    a1, b1 = hplane.parse_matrix("1,1;0,1"), hplane.parse_matrix("1,0;1,1")
    hit = freeness.relation_oracle(a1, b1, 6, "group")
    rel_ok = False
    if hit is not None:
        w1, w2 = hit
        rel_ok = freeness.evaluate_word(a1, b1, w1).same_isometry(freeness.evaluate_word(a1, b1, w2))
        target = freeness.evaluate_word(a1, b1, "aBa")
        rel_ok = rel_ok and (target @ target).is_identity()
    rep = freeness.demi_schottky_test(a, b, 1j, LN3, 3)
    err = max(abs(m - _direct_margin(a, b, p, q, 1j, LN3)) for (p, q), m in rep.margins.items())
    ok = none2 is None and hit is not None and rel_ok and err <= 1e-9
    return _result(8, "relation oracle and ping-pong margins", ok, sanov_relation=none2,
                   m1_relation=list(hit) if hit else None, margin_count=len(rep.margins),
                   margin_error=err, demi_schottky=rep.verdict, min_margin=min(rep.margins.values()))


def _crossing_pair(ell):
    lam = math.exp(ell / 2)
    s = 2**-0.5
    rot = MobiusMap(s, s, -s, s)
    a = MobiusMap.diag(lam)
    return a, rot @ a @ rot.inverse()


def displacement_criterion(seed=0):
    lam = math.exp(15.0)
    a = MobiusMap.diag(lam)
    t = MobiusMap(1.0, 1.0, 0.0, 1.0)
    b = t @ a @ t.inverse()
    try:
        cert = freeness.free_semigroup_by_displacement(a, b, LN3)
        status, note = cert.status, cert.trail
    except (freeness.ElementaryPairError, hplane.IsometryClassError) as exc:
        status, note = "error", str(exc)
    a2, b2 = _crossing_pair(math.acosh(2.0))
    p_min, cert2 = freeness.free_semigroup_powers(a2, b2, math.acosh(2.0), LN3)
    ok = status == "CertifiedFreeSemigroup" and p_min == 11
    return _result(9, "large-displacement free semigroup criterion", ok, status=status, note=note,
                   p_min=p_min, powers_status=cert2.status)


def entropy_coupling(seed=0):
    v1 = ed.free_semigroup_entropy_lower(1, 1)
    scaled = {L: ed.free_semigroup_entropy_lower(L, L) for L in (0.1, 10.0)}
    vals_ok = abs(v1 - LN2) <= 1e-6 and all(abs(v - LN2 / L) <= 1e-6 / L for L, v in scaled.items())
    cases = {
        "equality": ed.check_entropy_action(1, 1, LN2),
        "low_entropy": ed.check_entropy_action(1, 1, 0.5),
        "short_generator": ed.check_entropy_action(3, 0.001, 1),
    }
    # which part must fail, None when the instance is feasible
    expect = {"equality": None, "low_entropy": 0, "short_generator": 1}
    flags_ok = all(
        all(r.holds for r in cases[k]) if part is None else not cases[k][part].holds
        for k, part in expect.items()
    )
    return _result(10, "entropy of free semigroups", vals_ok and flags_ok, at_one=float(v1),
                   scaled={str(k): float(v) for k, v in scaled.items()},
                   reports=_reports([r for k in cases for r in cases[k]]))


def bounds_catalog(seed=0):
    d, al = LN3, math.acosh(2.0)
    sys_grid = [10.0**k for k in range(-6, 3)]
    collar = [bounds.collar_lower(d, al, 1.0, s) for s in sys_grid]
    collar_ok = all(x >= y for x, y in zip(collar, collar[1:]))
    eps0, _ = bounds.tube_radii(d, al, 1.0, 1e-3)
    eps_grid = [eps0 * f for f in (1.0, 0.5, 0.1, 1e-2, 1e-4)]
    radii = [bounds.tube_radii(d, al, 1.0, e)[1] for e in eps_grid]
    tube_ok = all(y > x for x, y in zip(radii, radii[1:])) and abs(radii[0] - eps0 * LN2) <= 1e-12
    mcs = [bounds.margulis_constants(1.0, 0.01, 1.0, bounds.BGTFunction.constant(n)) for n in (1, 10, 100, 1000)]
    mc_ok = all(p.eps0 >= q.eps0 and p.log_s0 >= q.log_s0 for p, q in zip(mcs, mcs[1:]))
    n1 = bounds.n_one(d, al)
    c01 = bounds.collar_lower(d, al, 1.0, 0.01)
    spot_ok = abs(eps0 - 0.04221) <= 1e-4 and n1 == 11 and abs(c01 - 0.2007) <= 1e-4
    return _result(11, "constants catalog", collar_ok and tube_ok and mc_ok and spot_ok, eps0=eps0, N1=n1,
                   collar_at_0_01=c01, monotone={"collar": collar_ok, "tube": tube_ok, "margulis": mc_ok})


CRITERIA = [
    tree_delta,
    plane_delta,
    translation_length,
    power_growth,
    free_group_entropy,
    doubling,
    margulis_domains,
    freeness_checks,
    displacement_criterion,
    entropy_coupling,
    bounds_catalog,
]


def run_all(seed=0) -> list:
    return [c(seed) for c in CRITERIA]


def determinism(seed=0, first=None):
    """Rerun criteria 1 to 11 and compare the serialized results byte for byte."""
    first = run_all(seed) if first is None else first
    a, b = dumps(first), dumps(run_all(seed))
    return _result(12, "byte-identical reruns", a == b, seed=seed, bytes=len(a))
