"""Command-line front end.

Every command prints a JSON report holding the command echo next to the
exact results. Exit codes: 0 success,
2 invalid input, 3 refused because an enumeration cap was exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Any, Callable

from . import __version__
from . import io as fio
from .corr import check_nonsignaling, evaluate, is_nonnegative, is_normalized
from .detmap import DEFAULT_ENUMERATION_CAP, INVERTIBILITY_CLASSES, CapExceeded, classify, count_maps, enumerate_maps
from .ineq import (
    GAMMA,
    ONE_NORM,
    PRIMITIVE,
    ZERO_BOUND,
    affine_equivalent,
    canonicalize,
    covariance_from_counts,
    variance,
    variance_optimal,
)
from .lifting import census_lift, lift_behavior, lift_expression, max_payoff
from .polytope import causal_vertices, classify_facets, dd_facets, dd_vertices, extremal, ns_hrep
from .ratlin import format_rational
from .stochmap import InvalidTransformation, decompose, validate
from .subspaces import classify_component, decompose_behavior, from_cg, to_cg

REPORT_FORMAT = "loctrans-report/1"
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3


def _fr(q) -> str:
    return format_rational(q)


def _load_behavior(path: str):
    return fio.behavior_from_json(fio.load_file(path), path)


def _load_expression(path: str):
    return fio.expression_from_json(fio.load_file(path), path)


def cmd_check(args) -> dict:
    P = _load_behavior(args.behavior)
    out: dict[str, Any] = {"nonnegative": is_nonnegative(P), "normalized": is_normalized(P)}
    if out["normalized"]:
        viol = check_nonsignaling(P, exhaustive=True if args.exhaustive else None)
        out["nonsignaling"] = not viol
        out["violations"] = [
            {
                "sources": list(v.sources),
                "targets": list(v.targets),
                "outputs": list(v.outputs),
                "inputs": list(v.inputs),
                "other_inputs": list(v.other_inputs),
                "values": [_fr(v.values[0]), _fr(v.values[1])],
            }
            for v in viol
        ]
    else:
        out["nonsignaling"] = None
    return out


def cmd_decompose(args) -> dict:
    if args.map:
        src, tgt, M = fio.transformation_matrix_from_json(fio.load_file(args.map), args.map)
        t = validate(M, src, tgt)
        dec = decompose(t)
        return {
            "terms": [
                {"weight": _fr(w), "map": fio.detmap_to_json(m, args.label_base)} for w, m in dec.terms
            ]
        }
    if not args.behavior:
        raise fio.InputError("decompose needs --behavior or --map")
    P = _load_behavior(args.behavior)
    comps = []
    for label, vecs in decompose_behavior(P).items():
        if any(vecs):
            comps.append(
                {
                    "label": list(label),
                    "class": classify_component(P.scenario, label),
                    "vector": fio.fmt_vec(vecs),
                }
            )
    return {"components": comps}


def cmd_canon(args) -> dict:
    phi = _load_expression(args.expr[0])
    cf = canonicalize(phi, args.mode, args.scale)
    return {
        "mode": cf.mode,
        "scale_convention": cf.scale_convention,
        "coeffs": fio.fmt_vec(cf.coeffs),
        "bound": _fr(cf.bound),
    }


def cmd_equiv(args) -> dict:
    if len(args.expr) != 2:
        raise fio.InputError("equiv needs exactly two --expr files")
    phi1, phi2 = (_load_expression(p) for p in args.expr)
    cert = affine_equivalent(phi1, phi2)
    if cert is None:
        return {"equivalent": False}
    return {
        "equivalent": True,
        "certificate": {"s": _fr(cert.s), "t": _fr(cert.t), "w": fio.fmt_vec(cert.w)},
    }


def cmd_variance(args) -> dict:
    phi = _load_expression(args.expr[0])
    if not args.counts:
        raise fio.InputError("variance needs --counts")
    counts = _load_behavior(args.counts)
    cov = covariance_from_counts(counts)
    best = variance_optimal(phi, cov)
    return {
        "optimal": fio.expression_to_json(best),
        "variance_input": _fr(variance(phi, cov)),
        "variance_optimal": _fr(variance(best, cov)),
    }


def cmd_maps(args) -> dict:
    src = fio.parse_card(args.source)
    tgt = fio.parse_card(args.target)
    total = count_maps(src, tgt)
    listed = []
    n = 0
    for m in enumerate_maps(src, tgt, args.filter, cap=args.cap):
        n += 1
        if args.list:
            entry = fio.detmap_to_json(m, args.label_base)
            entry["class"] = classify(m)
            listed.append(entry)
    out: dict[str, Any] = {"total": total, "matching": n}
    if src.has_single_output_inputs or tgt.has_single_output_inputs:
        out["advisory"] = "single-output inputs present; classification is algebraic"
    if args.list:
        out["maps"] = listed
    return out


def cmd_lift(args) -> dict:
    if not args.map:
        raise fio.InputError("lift needs --map")
    m = fio.detmap_from_json(fio.load_file(args.map), args.label_base, args.map)
    if args.behavior:
        P = _load_behavior(args.behavior)
        return {"behavior": fio.behavior_to_json(lift_behavior(P, args.party, m))}
    if args.expr:
        phi = _load_expression(args.expr[0])
        return {"expression": fio.expression_to_json(lift_expression(phi, args.party, m))}
    raise fio.InputError("lift needs --behavior or --expr")


def cmd_payoff(args) -> dict:
    phi = _load_expression(args.expr[0])
    P = _load_behavior(args.behavior)
    res = max_payoff(phi, P, cap=args.cap)
    return {"value": _fr(res.value), "maps": [fio.detmap_to_json(m, args.label_base) for m in res.maps]}


def cmd_vertices(args) -> dict:
    if args.hrep:
        h = fio.hrep_from_json(fio.load_file(args.hrep), args.hrep)
    elif args.scenario:
        h = ns_hrep(fio.scenario_from_json(fio.load_file(args.scenario), args.scenario))
    else:
        raise fio.InputError("vertices needs --scenario or --hrep")
    v = dd_vertices(h)
    if args.out:
        _write(args.out, fio.write_ext(v) if args.out.endswith(".ext") else fio.dumps(fio.vrep_to_json(v)))
    out: dict[str, Any] = {"count": len(v)}
    if not args.out:
        out["vertices"] = fio.vrep_to_json(v)["vertices"]
    return out


def cmd_facets(args) -> dict:
    sc = None
    if args.causal:
        a_txt, b_txt = args.causal.split(":")
        a, b = fio.parse_card(a_txt), fio.parse_card(b_txt)
        v = causal_vertices(a, b)
        from .scenario import Scenario

        sc = Scenario.fully_signaling(a, b)
    elif args.vertices:
        v = fio.vrep_from_json(fio.load_file(args.vertices), args.vertices)
        if args.scenario:
            sc = fio.scenario_from_json(fio.load_file(args.scenario), args.scenario)
    else:
        raise fio.InputError("facets needs --causal A:B or --vertices")
    h = dd_facets(v)
    out: dict[str, Any] = {"vertices": len(v), "facets": h.ineq_A.nrows}
    if sc is not None:
        classes = classify_facets(h, sc, keep_members=False)
        out["classes"] = [
            {"orbit_size": c.orbit_size, "representative": fio.fmt_vec(c.representative.coeffs)}
            for c in classes
        ]
    if args.out:
        _write(args.out, fio.write_ine(h) if args.out.endswith(".ine") else fio.dumps(fio.hrep_to_json(h)))
    return out


def cmd_census(args) -> dict:
    P = _load_behavior(args.behavior)
    tgt = fio.parse_card(args.target)
    c = census_lift(P, args.party, tgt, cap=args.cap)
    out: dict[str, Any] = {"total": c.total_maps, "invertible": c.invertible_count, "unique": c.unique_images}
    if args.extremal and c.images:
        h = ns_hrep(c.images[0].scenario)
        out["extremal"] = sum(1 for img in c.images if extremal(img, h))
    if args.images:
        out["images"] = [fio.fmt_vec(img.coeffs) for img in c.images]
    return out


def cmd_convert(args) -> dict:
    fmt_in, fmt_out = args.from_format, args.to_format
    if fmt_in in ("ine", "ext"):
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
        obj = fio.read_ine(text, args.input) if fmt_in == "ine" else fio.read_ext(text, args.input)
    elif fmt_in == "cg-json":
        sc, v = fio.cg_from_json(fio.load_file(args.input), args.input)
        obj = from_cg(sc, v)
    elif fmt_in == "json":
        data = fio.load_file(args.input)
        if isinstance(data, dict) and "vertices" in data:
            obj = fio.vrep_from_json(data, args.input)
        elif isinstance(data, dict) and "inequalities" in data:
            obj = fio.hrep_from_json(data, args.input)
        else:
            obj = fio.behavior_from_json(data, args.input)
    else:
        raise fio.InputError(f"unknown input format {fmt_in}")
    from .corr import Behavior
    from .polytope import HRep, VRep

    if fmt_out == "json":
        if isinstance(obj, Behavior):
            text = fio.dumps(fio.behavior_to_json(obj))
        elif isinstance(obj, HRep):
            text = fio.dumps(fio.hrep_to_json(obj))
        else:
            text = fio.dumps(fio.vrep_to_json(obj))
    elif fmt_out == "cg-json":
        if not isinstance(obj, Behavior):
            raise fio.InputError("cg-json output needs a behavior")
        text = fio.dumps(fio.cg_to_json(obj.scenario, to_cg(obj)))
    elif fmt_out == "ine":
        if not isinstance(obj, HRep):
            raise fio.InputError("ine output needs an H-representation")
        text = fio.write_ine(obj)
    elif fmt_out == "ext":
        if not isinstance(obj, VRep):
            raise fio.InputError("ext output needs a vertex list")
        text = fio.write_ext(obj)
    else:
        raise fio.InputError(f"unknown output format {fmt_out}")
    _write(args.output, text)
    return {"written": args.output, "from": fmt_in, "to": fmt_out}


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


COMMANDS: dict[str, Callable[[argparse.Namespace], dict]] = {
    "check": cmd_check,
    "decompose": cmd_decompose,
    "canon": cmd_canon,
    "equiv": cmd_equiv,
    "variance": cmd_variance,
    "maps": cmd_maps,
    "lift": cmd_lift,
    "payoff": cmd_payoff,
    "vertices": cmd_vertices,
    "facets": cmd_facets,
    "census": cmd_census,
    "convert": cmd_convert,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--behavior", help="behavior JSON file")
    common.add_argument("--expr", action="append", default=[], help="expression JSON file (repeat for equiv)")
    common.add_argument("--target", help="target cardinalities, e.g. 3,3,3")
    common.add_argument("--mode", choices=[GAMMA, ZERO_BOUND], default=GAMMA)
    common.add_argument("--scale", choices=[PRIMITIVE, ONE_NORM], default=PRIMITIVE)
    common.add_argument("--threads", type=int, default=1, help="worker count (computations run in one process)")
    common.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP, help="enumeration cap")
    common.add_argument("--pretty", action="store_true", help="print a readable table instead of JSON")
    common.add_argument("--label-base", type=int, choices=[0, 1], default=1, help="label base of map files")

    parser = argparse.ArgumentParser(prog="loctrans", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="nonnegativity, normalization, nonsignaling")
    p.add_argument("--exhaustive", action="store_true", help="check every source/target subset pair")
    p = sub.add_parser("decompose", parents=[common], help="subspace components or convex map decomposition")
    p.add_argument("--map", help="local transformation JSON file")
    sub.add_parser("canon", parents=[common], help="canonical form of an inequality")
    sub.add_parser("equiv", parents=[common], help="affine equivalence of two inequalities")
    p = sub.add_parser("variance", parents=[common], help="variance-optimal equivalent expression")
    p.add_argument("--counts", help="behavior-shaped JSON of observed counts")
    p = sub.add_parser("maps", parents=[common], help="enumerate deterministic maps")
    p.add_argument("--source", required=True)
    p.add_argument("--filter", choices=list(INVERTIBILITY_CLASSES))
    p.add_argument("--list", action="store_true")
    p = sub.add_parser("lift", parents=[common], help="lift a behavior or an expression")
    p.add_argument("--map", help="deterministic map JSON file")
    p.add_argument("--party", type=int, default=0)
    sub.add_parser("payoff", parents=[common], help="maximal average payoff")
    p = sub.add_parser("vertices", parents=[common], help="vertex enumeration")
    p.add_argument("--hrep", help="H-representation JSON file")
    p.add_argument("--out", help="write vertices to .ext or .json")
    p = sub.add_parser("facets", parents=[common], help="facet enumeration and classification")
    p.add_argument("--vertices", help="vertex list JSON file")
    p.add_argument("--causal", help="causal polytope of two parties, e.g. 2,2:3,3")
    p.add_argument("--out", help="write facets to .ine or .json")
    p = sub.add_parser("census", parents=[common], help="lift a behavior by every left-invertible map")
    p.add_argument("--party", type=int, default=0)
    p.add_argument("--extremal", action="store_true", help="count images extremal in the nonsignaling polytope")
    p.add_argument("--images", action="store_true", help="include the image vectors")
    p = sub.add_parser("convert", parents=[common], help="convert between file formats")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--from", dest="from_format", choices=["json", "ext", "ine", "cg-json"], required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--to", dest="to_format", choices=["json", "ext", "ine", "cg-json"], required=True)
    return parser


def _echo(args: argparse.Namespace) -> dict:
    skip = {"command", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False and v != []}


def render_pretty(report: dict) -> str:
    lines = [f"command: {report['command']}"]

    def walk(obj, key):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(v, f"{key}.{k}" if key else k)
        elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
            for i, v in enumerate(obj):
                walk(v, f"{key}[{i}]")
        elif isinstance(obj, list):
            lines.append(f"{key}: {' '.join(map(str, obj))}")
        else:
            lines.append(f"{key}: {obj}")

    walk(report.get("result", {}), "")
    if "error" in report:
        lines.append(f"error: {report['error']}")
    lines.append(f"seconds: {report['timing']['seconds']}")
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    parser = build_parser()
    args = parser.parse_args(argv)
    report: dict[str, Any] = {"format": REPORT_FORMAT, "command": args.command, "args": _echo(args)}
    start = time.perf_counter()
    code = EXIT_OK
    try:
        report["result"] = COMMANDS[args.command](args)
    except CapExceeded as exc:
        code = EXIT_CAP
        report["error"] = str(exc)
    except InvalidTransformation as exc:
        code = EXIT_INVALID
        report["error"] = str(exc)
        report["violations"] = [{"kind": v.kind, "detail": v.detail} for v in exc.violations]
    except (ValueError, KeyError, OSError) as exc:
        code = EXIT_INVALID
        report["error"] = str(exc)
    report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
    report["exit_code"] = code
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    pretty = "--pretty" in (argv if argv is not None else sys.argv[1:])
    sys.stdout.write(render_pretty(report) if pretty else fio.dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
