"""Command-line front end.

Every subcommand prints one JSON report on stdout (or CSV for ``growth
--format csv``) and a short human summary on stderr.  Exit codes: 0 ok,
1 a check failed, 2 bad input, 3 the relation oracle found a relation.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

from gromolab import acceptance, bounds, displacement as disp, entropy_doubling as ed, freeness, hplane
from gromolab.graph_space import CayleySpace, ResourceError
from gromolab.metric_core import UnsupportedOperation, box_sampler, four_point_delta, half_plane
from gromolab.serialize import dumps

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_RELATION = 0, 1, 2, 3
CONSTANTS = {"ln2": math.log(2.0), "ln3": math.log(3.0), "pi": math.pi, "e": math.e}
EMPIRICAL_LABEL = "empirical lower bound on the four-point constant"


class InputError(ValueError):
    pass


# --- argument parsing helpers ------------------------------------------------

def parse_number(text: str) -> float:
    t = text.strip()
    if t in CONSTANTS:
        return CONSTANTS[t]
    try:
        return float(Fraction(t)) if "/" in t else float(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_point(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"point must be 'x,y', got {text!r}")
    x, y = (parse_number(p) for p in parts)
    try:
        return hplane.hpoint(x, y)
    except hplane.DomainError as exc:
        raise InputError(str(exc)) from exc


def parse_matrix(text: str) -> hplane.MobiusMap:
    try:
        return hplane.parse_matrix(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad matrix {text!r}: {exc}") from exc


def parse_params(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise InputError(f"parameter {item!r} is not of the form k=v")
        out[key.strip()] = parse_number(val)
    return out


def parse_box(text: str):
    vals = [parse_number(v) for v in text.split(",")]
    if len(vals) != 4 or not (vals[0] < vals[1] and 0 < vals[2] < vals[3]):
        raise InputError("box must be x0,x1,y0,y1 with x0 < x1 and 0 < y0 < y1")
    return vals


def parse_grid(text: str):
    vals = text.split(",")
    if len(vals) != 6:
        raise InputError("grid must be x0,x1,y0,y1,nx,ny")
    x0, x1, y0, y1 = (parse_number(v) for v in vals[:4])
    try:
        nx, ny = int(vals[4]), int(vals[5])
    except ValueError as exc:
        raise InputError("grid sizes must be integers") from exc
    if not (0 < y0 < y1 and nx > 0 and ny > 0):
        raise InputError("grid needs 0 < y0 < y1 and positive sizes")
    return disp.grid(x0, x1, y0, y1, nx, ny)


def parse_group(text: str) -> CayleySpace:
    desc = text.split(":", 1)[1] if text.startswith(("tree:", "graph:")) else text
    try:
        return CayleySpace.parse(desc)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def threads() -> int:
    raw = os.environ.get("GROMOLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"GROMOLAB_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise InputError("GROMOLAB_THREADS must be a positive integer")
    return n


def resolve_delta(args) -> float:
    """The --delta value; 'empirical' measures it on the half-plane and needs an explicit opt-in."""
    if args.delta != "empirical":
        return parse_number(args.delta)
    if not args.accept_empirical_delta:
        raise InputError(
            "--delta empirical feeds a measured four-point value into certified checks; "
            "pass --accept-empirical-delta to allow this"
        )
    return four_point_delta(half_plane(), box_sampler(), 10_000, args.seed).value


# --- subcommands ---------------------------------------------------------------

def cmd_delta(args):
    n = args.samples
    if n < 1:
        raise InputError("--samples must be positive")
    if args.space == "hplane":
        box = parse_box(args.box) if args.box else [-5.0, 5.0, 0.1, 10.0]
        est = four_point_delta(half_plane(), box_sampler(*box), n, args.seed)
        extra = {"box": box}
    else:
        G = parse_group(args.space)
        pool = G.ball(None, args.radius)
        est = four_point_delta(G.handle(), pool, n, args.seed)
        extra = {"radius": args.radius, "pool_size": len(pool)}
    witness = [G.format(p) if args.space != "hplane" else p for p in est.witness] if est.witness else None
    payload = {"space": args.space, "value": est.value, "label": EMPIRICAL_LABEL,
               "quadruples": est.quadruple_count, "witness": witness, **extra}
    return EXIT_OK, payload, f"four-point delta ~ {est.value:.6g} over {est.quadruple_count} quadruples"


def cmd_growth(args):
    G = parse_group(args.group)
    if args.rmax < 1:
        raise InputError("--rmax must be at least 1")
    prof = ed.growth_profile(G, range(args.rmax + 1))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(prof.csv())
    payload = {"group": args.group, "points": [[R, c] for R, c in prof.points],
               "slope_estimate": prof.slope_estimate, "last_point_estimate": prof.last_point_estimate,
               "csv": prof.csv()}
    return EXIT_OK, payload, f"growth slope ~ {prof.slope_estimate:.6g}"


def cmd_classify(args):
    m = parse_matrix(args.matrix)
    cls = hplane.classify(m)
    length = hplane.closed_form_length(m) if cls.kind == "Hyperbolic" else 0.0
    payload = {**cls.as_dict(), "length": length}
    return EXIT_OK, payload, f"{cls.kind}, length {length:.6g}"


def cmd_length(args):
    m = parse_matrix(args.matrix)
    x = parse_point(args.base)
    delta = resolve_delta(args)
    if args.nmax < 1:
        raise InputError("--nmax must be positive")
    br = disp.stable_length_bracket(m, x, args.nmax, delta)
    payload = {"lo": br.lo, "hi": br.hi, "width": br.width, "n_used": br.n_used, "delta": br.delta_used}
    status = EXIT_OK
    if hplane.classify(m).kind == "Hyperbolic":
        ell = hplane.closed_form_length(m)
        payload["closed_form"] = ell
        payload["contains_closed_form"] = br.contains(ell, 1e-9)
        status = EXIT_OK if payload["contains_closed_form"] else EXIT_FAILED
    return status, payload, f"length in [{br.lo:.6g}, {br.hi:.6g}]"


def cmd_margulis(args):
    m = parse_matrix(args.matrix)
    if hplane.classify(m).kind != "Hyperbolic":
        raise InputError("margulis needs a hyperbolic matrix")
    delta = resolve_delta(args)
    R = args.R
    ell = hplane.closed_form_length(m)
    if not R > ell:
        raise InputError(f"--R must exceed the translation length {ell:.6g}")
    rc = hplane.collar_radius(ell, R)
    x = parse_point(args.base)
    q = disp.displacement_radius(m, x, ell, R)
    reports = [disp.check_tube(m, R, delta, args.samples, args.seed),
               disp.check_distance_to_axis(m, x, delta),
               disp.check_domain_separation(m, ell, R, x if not q.member else hplane.axis(m).offset_point(0.0, rc))]
    payload = {"collar_radius": rc, "R": R, "length": ell,
               "base": {"point": x, "R_gamma": q.value, "member": q.member, "k": q.k_attained},
               "agreement": disp.collar_agreement(m, R, args.samples, args.seed)}
    if args.grid:
        ax = hplane.axis(m)
        pts = parse_grid(args.grid)
        grid_member = [disp.displacement_radius(m, p, ell, R).member for p in pts]
        closed = [ax.distance_to(p) <= rc for p in pts]
        payload["grid"] = {"points": len(pts), "members": sum(grid_member),
                           "disagree": sum(a != b for a, b in zip(grid_member, closed))}
    payload["reports"] = [r.as_dict() for r in reports]
    ok = all(r.holds for r in reports)
    return (EXIT_OK if ok else EXIT_FAILED), payload, f"collar radius {rc:.6g}, reports {'hold' if ok else 'FAIL'}"


def cmd_pingpong(args):
    a, b = parse_matrix(args.a), parse_matrix(args.b)
    delta = resolve_delta(args)
    P = args.range
    if P < 1:
        raise InputError("--range must be at least 1")
    x = parse_point(args.base) if args.base else None
    if args.mode in ("schottky", "demi"):
        test = freeness.schottky_test if args.mode == "schottky" else freeness.demi_schottky_test
        rep = test(a, b, x if x is not None else 1j, delta, P)
        payload = {**rep.as_dict(), "test": rep.mode, "mode": args.mode, "x": rep.x}
        ok = rep.passed
        summary = f"{args.mode}: {rep.verdict}"
    else:
        pts = [x] if x is not None else disp.grid(-3, 3, 0.05, 20, 25, 25)
        L_est = disp.margulis_constant(a, b, pts, P)
        br_a = disp.stable_length_bracket(a, pts[0], 1024, delta)
        br_b = disp.stable_length_bracket(b, pts[0], 1024, delta)
        try:
            cert = freeness.margulis_free_dispatch(a, b, delta, L_est, br_a, br_b, x, P)
        except freeness.InapplicableError as exc:
            payload = {"mode": "dispatch", "L_estimate": L_est, "status": "Inapplicable", "reason": str(exc)}
            return EXIT_FAILED, payload, f"dispatch inapplicable: {exc}"
        payload = {"mode": "dispatch", "L_estimate": L_est, **cert.as_dict()}
        ok = cert.status.startswith("Certified")
        summary = f"dispatch: {cert.status}"
    return (EXIT_OK if ok else EXIT_FAILED), payload, summary


def cmd_oracle(args):
    a, b = parse_matrix(args.a), parse_matrix(args.b)
    if not (a.exact and b.exact):
        raise InputError("the relation oracle needs exact matrices (integers or p/q entries with determinant 1)")
    if args.maxlen < 0:
        raise InputError("--maxlen must be nonnegative")
    try:
        hit = freeness.relation_oracle(a, b, args.maxlen, args.mode)
    except freeness.BudgetError as exc:
        raise InputError(str(exc)) from exc
    payload = {"relation": list(hit) if hit else None, "max_len": args.maxlen, "mode": args.mode,
               "words": freeness.word_count(args.mode, args.maxlen)}
    if hit:
        return EXIT_RELATION, payload, f"relation found: {hit[0]} = {hit[1]}"
    return EXIT_OK, payload, f"no relation up to length {args.maxlen}"


def cmd_bounds(args):
    params = parse_params(args.params)
    name = args.name
    if name in bounds.NAMED_CHECKS:
        rep = bounds.check_named_bound(name, **params)
        payload = {"name": name, "params": params, "reports": [rep.as_dict()]}
        return (EXIT_OK if rep.holds else EXIT_FAILED), payload, f"{name}: {'holds' if rep.holds else 'FAILS'}"
    if name in bounds.CATALOG:
        vals = bounds.CATALOG[name](params)
        return EXIT_OK, {"name": name, "params": params, "values": vals}, f"{name}: {vals}"
    known = sorted(set(bounds.NAMED_CHECKS) | set(bounds.CATALOG))
    raise InputError(f"unknown bound {name!r}; known: {', '.join(known)}")


def cmd_verify(args):
    results = acceptance.run_all(args.seed)
    results.append(acceptance.determinism(args.seed, results))
    lines = [f"[{'PASS' if r['passed'] else 'FAIL'}] {r['id']:>2}. {r['title']}" for r in results]
    n_fail = sum(not r["passed"] for r in results)
    payload = {"criteria": results, "passed": len(results) - n_fail, "failed": n_fail}
    return (EXIT_OK if n_fail == 0 else EXIT_FAILED), payload, "\n".join(lines)


COMMANDS = {
    "delta": cmd_delta, "growth": cmd_growth, "classify": cmd_classify, "length": cmd_length,
    "margulis": cmd_margulis, "pingpong": cmd_pingpong, "oracle": cmd_oracle, "bounds": cmd_bounds,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    with_delta = argparse.ArgumentParser(add_help=False)
    with_delta.add_argument("--delta", default="ln3", help="number, ln3, or 'empirical'")
    with_delta.add_argument("--accept-empirical-delta", action="store_true")

    p = argparse.ArgumentParser(prog="gromolab", description="Coarse hyperbolic geometry toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("delta", parents=[common], help="empirical four-point constant")
    s.add_argument("--space", default="hplane", help="hplane, or a group such as tree:free:2")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--box", help="x0,x1,y0,y1 sampling box for hplane")
    s.add_argument("--radius", type=int, default=6, help="ball radius of the vertex pool for groups")

    s = sub.add_parser("growth", parents=[common], help="ball counts and growth slope")
    s.add_argument("--group", required=True)
    s.add_argument("--rmax", type=int, required=True)
    s.add_argument("--csv", help="also write the R,count table to this file")

    s = sub.add_parser("classify", parents=[common], help="classify a Mobius map")
    s.add_argument("--matrix", required=True)

    s = sub.add_parser("length", parents=[common, with_delta], help="stable length bracket")
    s.add_argument("--matrix", required=True)
    s.add_argument("--base", default="0,1")
    s.add_argument("--nmax", type=int, default=1024)

    s = sub.add_parser("margulis", parents=[common, with_delta], help="Margulis domain checks")
    s.add_argument("--matrix", required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--base", default="0,1")
    s.add_argument("--grid", help="x0,x1,y0,y1,nx,ny")
    s.add_argument("--samples", type=int, default=1000)

    s = sub.add_parser("pingpong", parents=[common, with_delta], help="ping-pong tests")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--range", type=int, default=3)
    s.add_argument("--base")
    s.add_argument("--mode", choices=("schottky", "demi", "dispatch"), default="demi")

    s = sub.add_parser("oracle", parents=[common], help="exact relation search")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--maxlen", type=int, required=True)
    s.add_argument("--mode", choices=("group", "semigroup"), default="group")

    s = sub.add_parser("bounds", parents=[common], help="formula catalog and named checks")
    s.add_argument("--name", required=True)
    s.add_argument("--params", default="")

    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "output")}


def _emit(text: str, args):
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# options whose values may legitimately start with a minus sign
_SIGNED = ("--box", "--grid", "--base", "--matrix", "--a", "--b")


def _glue_signed(argv):
    out, it = [], iter(argv)
    for tok in it:
        if tok in _SIGNED:
            val = next(it, None)
            if val is not None and val.startswith("-") and not val.startswith("--"):
                tok = f"{tok}={val}"
            elif val is not None:
                out.append(tok)
                tok = val
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_signed(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    report = {"command": args.command, "config": _config(args)}
    try:
        threads()
        code, payload, summary = COMMANDS[args.command](args)
    except (InputError, hplane.DomainError, hplane.IsometryClassError, bounds.BoundDomainError,
            freeness.ElementaryPairError, UnsupportedOperation, ResourceError, ValueError) as exc:
        report.update(status="error", payload={}, error=str(exc))
        _emit(dumps(report), args)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status = {EXIT_OK: "ok", EXIT_FAILED: "failed", EXIT_RELATION: "relation_found"}[code]
    report.update(status=status, payload=payload)
    if args.format == "csv" and args.command == "growth":
        _emit(payload["csv"], args)
    else:
        _emit(dumps(report), args)
    print(summary, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
