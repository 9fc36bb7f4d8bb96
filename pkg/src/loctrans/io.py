"""JSON and cdd-style text formats.

Rationals are written as "p/q" strings, or "p" for integers.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from .corr import Behavior, BellExpression
from .detmap import DetMap
from .ratlin import RatMatrix, as_rational, format_rational
from .scenario import PartyCard, Scenario
from .stochmap import LocalTransformation


class InputError(ValueError):
    """Malformed input, with the offending location in the message."""


def _rat(value: Any, where: str) -> Fraction:
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{where}: {value!r} is not an exact rational ({exc})") from None


def _rats(values: Any, where: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise InputError(f"{where}: expected a list")
    return tuple(_rat(v, f"{where}[{i}]") for i, v in enumerate(values))


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    if key not in obj:
        raise InputError(f"{where}: missing field '{key}'")
    return obj[key]


def fmt_vec(v) -> list[str]:
    return [format_rational(Fraction(x)) for x in v]


def fmt_matrix(M: RatMatrix) -> list[list[str]]:
    return [fmt_vec(r) for r in M.rows]


def loads(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_file(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return loads(text, path)


_FLAT_ARRAY = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]", re.S)


def dumps(obj: Any) -> str:
    """Indented JSON with arrays of scalars kept on one line."""
    text = json.dumps(obj, indent=2)
    text = _FLAT_ARRAY.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


# scenario and cards -------------------------------------------------------


def card_from_json(value: Any, where: str = "card") -> PartyCard:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise InputError(f"{where}: expected a list of output counts")
    try:
        return PartyCard(value)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def parse_card(text: str) -> PartyCard:
    """Parse "3,3,3" into a party card."""
    try:
        return PartyCard(int(t) for t in text.split(","))
    except ValueError as exc:
        raise InputError(f"cardinality '{text}': {exc}") from None


def scenario_to_json(sc: Scenario) -> dict:
    return {
        "parties": [list(c.outputs) for c in sc.parties],
        "signaling": [list(e) for e in sorted(sc.signaling)],
    }


def scenario_from_json(obj: Any, where: str = "scenario") -> Scenario:
    parties = _field(obj, "parties", where)
    if not isinstance(parties, list) or not parties:
        raise InputError(f"{where}.parties: expected a nonempty list")
    cards = [card_from_json(p, f"{where}.parties[{i}]") for i, p in enumerate(parties)]
    edges = obj.get("signaling", [])
    if not isinstance(edges, list):
        raise InputError(f"{where}.signaling: expected a list of pairs")
    pairs = []
    for i, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise InputError(f"{where}.signaling[{i}]: expected a pair of party indices")
        pairs.append(tuple(e))
    try:
        return Scenario(cards, pairs)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


# behaviors and expressions ------------------------------------------------


def behavior_to_json(P: Behavior) -> dict:
    return {"scenario": scenario_to_json(P.scenario), "coeffs": fmt_vec(P.coeffs)}


def behavior_from_json(obj: Any, where: str = "behavior") -> Behavior:
    sc = scenario_from_json(_field(obj, "scenario", where), f"{where}.scenario")
    coeffs = _rats(_field(obj, "coeffs", where), f"{where}.coeffs")
    if len(coeffs) != sc.dim:
        raise InputError(f"{where}.coeffs: expected {sc.dim} entries, got {len(coeffs)}")
    return Behavior(sc, coeffs)


def expression_to_json(phi: BellExpression) -> dict:
    out = {"scenario": scenario_to_json(phi.scenario), "coeffs": fmt_vec(phi.coeffs)}
    if phi.bound is not None:
        out["bound"] = format_rational(phi.bound)
    return out


def expression_from_json(obj: Any, where: str = "expression") -> BellExpression:
    sc = scenario_from_json(_field(obj, "scenario", where), f"{where}.scenario")
    coeffs = _rats(_field(obj, "coeffs", where), f"{where}.coeffs")
    if len(coeffs) != sc.dim:
        raise InputError(f"{where}.coeffs: expected {sc.dim} entries, got {len(coeffs)}")
    bound = obj.get("bound")
    return BellExpression(sc, coeffs, None if bound is None else _rat(bound, f"{where}.bound"))


# maps ---------------------------------------------------------------------


def detmap_to_json(m: DetMap, label_base: int = 1) -> dict:
    shift = 1 - label_base
    return {
        "source": list(m.source.outputs),
        "target": list(m.target.outputs),
        "xi": [v - shift for v in m.xi],
        "alphas": [[v - shift for v in al] for al in m.alphas],
    }


def detmap_from_json(obj: Any, label_base: int = 1, where: str = "map") -> DetMap:
    shift = 1 - label_base
    src = card_from_json(_field(obj, "source", where), f"{where}.source")
    tgt = card_from_json(_field(obj, "target", where), f"{where}.target")
    xi = _field(obj, "xi", where)
    alphas = _field(obj, "alphas", where)
    try:
        return DetMap(src, tgt, tuple(v + shift for v in xi), tuple(tuple(v + shift for v in al) for al in alphas))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def transformation_to_json(t: LocalTransformation) -> dict:
    return {
        "source": list(t.source.outputs),
        "target": list(t.target.outputs),
        "matrix": fmt_matrix(t.matrix),
    }


def matrix_from_json(obj: Any, where: str) -> RatMatrix:
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{where}: expected a nonempty list of rows")
    rows = [_rats(r, f"{where}[{i}]") for i, r in enumerate(obj)]
    if any(len(r) != len(rows[0]) for r in rows):
        raise InputError(f"{where}: rows have different lengths")
    return RatMatrix(rows)


def transformation_matrix_from_json(obj: Any, where: str = "transformation"):
    src = card_from_json(_field(obj, "source", where), f"{where}.source")
    tgt = card_from_json(_field(obj, "target", where), f"{where}.target")
    M = matrix_from_json(_field(obj, "matrix", where), f"{where}.matrix")
    return src, tgt, M


# polytopes ----------------------------------------------------------------


def hrep_to_json(h) -> dict:
    return {
        "dimension": h.ambient_dim,
        "equalities": {"A": fmt_matrix(h.eq_A), "b": fmt_vec(h.eq_b)},
        "inequalities": {"A": fmt_matrix(h.ineq_A), "c": fmt_vec(h.ineq_c)},
    }


def _rows_or_empty(obj: Any, n: int | None, where: str) -> RatMatrix:
    if obj == []:
        if n is None:
            raise InputError(f"{where}: empty matrix needs 'dimension'")
        return RatMatrix([], n)
    return matrix_from_json(obj, where)


def hrep_from_json(obj: Any, where: str = "hrep"):
    from .polytope import HRep

    n = obj.get("dimension") if isinstance(obj, dict) else None
    eq = _field(obj, "equalities", where)
    ineq = _field(obj, "inequalities", where)
    A_json = _field(ineq, "A", f"{where}.inequalities")
    E_json = _field(eq, "A", f"{where}.equalities")
    if n is None and A_json == [] and E_json != []:
        E = matrix_from_json(E_json, f"{where}.equalities.A")
        n = E.ncols
    A = _rows_or_empty(A_json, n, f"{where}.inequalities.A")
    E = _rows_or_empty(E_json, A.ncols, f"{where}.equalities.A")
    b = _rats(_field(eq, "b", f"{where}.equalities"), f"{where}.equalities.b")
    c = _rats(_field(ineq, "c", f"{where}.inequalities"), f"{where}.inequalities.c")
    try:
        return HRep(E, b, A, c)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def vrep_to_json(v) -> dict:
    return {"vertices": [fmt_vec(p) for p in v.vertices]}


def vrep_from_json(obj: Any, where: str = "vrep"):
    from .polytope import VRep

    verts = _field(obj, "vertices", where)
    if not isinstance(verts, list):
        raise InputError(f"{where}.vertices: expected a list")
    return VRep(tuple(_rats(p, f"{where}.vertices[{i}]") for i, p in enumerate(verts)))


def _table_lines(rows: list[list[Fraction]], ncols: int) -> list[str]:
    out = [f"{len(rows)} {ncols} rational"]
    for r in rows:
        out.append(" " + " ".join(format_rational(v) for v in r))
    return out


def write_ine(h) -> str:
    """cdd H-representation: each row [c, -A] means c - A x >= 0."""
    n = h.ambient_dim
    rows = [[b] + [-v for v in r] for r, b in zip(h.eq_A.rows, h.eq_b)]
    rows += [[c] + [-v for v in r] for r, c in zip(h.ineq_A.rows, h.ineq_c)]
    lines = ["H-representation"]
    if h.eq_A.nrows:
        lines.append("linearity " + " ".join(str(k) for k in [h.eq_A.nrows] + list(range(1, h.eq_A.nrows + 1))))
    lines.append("begin")
    lines += _table_lines(rows, n + 1)
    lines.append("end")
    return "\n".join(lines) + "\n"


def write_ext(v) -> str:
    """cdd V-representation with every row a vertex (leading 1)."""
    n = len(v.vertices[0]) if v.vertices else 0
    rows = [[Fraction(1)] + list(p) for p in v.vertices]
    lines = ["V-representation", "begin"] + _table_lines(rows, n + 1) + ["end"]
    return "\n".join(lines) + "\n"


def _parse_table(text: str, kind: str, source: str):
    lines = text.splitlines()
    linearity: set[int] = set()
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("*"):
            continue
        if raw.endswith("-representation"):
            if raw != f"{kind}-representation":
                raise InputError(f"{source}: line {i}: expected {kind}-representation, found {raw}")
            continue
        if raw.startswith("linearity"):
            parts = raw.split()[1:]
            try:
                count = int(parts[0])
                linearity = {int(t) for t in parts[1:1 + count]}
            except (IndexError, ValueError):
                raise InputError(f"{source}: line {i}: malformed linearity line") from None
            continue
        if raw == "begin":
            break
    else:
        raise InputError(f"{source}: no 'begin' line")
    size = lines[i].split()
    i += 1
    try:
        m, n = int(size[0]), int(size[1])
    except (IndexError, ValueError):
        raise InputError(f"{source}: line {i}: expected 'rows cols type'") from None
    rows = []
    for r in range(m):
        if i >= len(lines):
            raise InputError(f"{source}: expected {m} rows, found {r}")
        tokens = lines[i].split()
        i += 1
        if len(tokens) != n:
            raise InputError(f"{source}: line {i}: expected {n} entries, got {len(tokens)}")
        rows.append([_rat(t, f"{source}: line {i}") for t in tokens])
    return rows, linearity, n


def read_ine(text: str, source: str = "<ine>"):
    from .polytope import HRep

    rows, linearity, n = _parse_table(text, "H", source)
    eq, eq_b, ineq, ineq_c = [], [], [], []
    for k, r in enumerate(rows, start=1):
        a = [-v for v in r[1:]]
        if k in linearity:
            eq.append(a)
            eq_b.append(r[0])
        else:
            ineq.append(a)
            ineq_c.append(r[0])
    return HRep(RatMatrix(eq, n - 1), tuple(eq_b), RatMatrix(ineq, n - 1), tuple(ineq_c))


def read_ext(text: str, source: str = "<ext>"):
    from .polytope import VRep

    rows, _, _ = _parse_table(text, "V", source)
    verts = []
    for k, r in enumerate(rows, start=1):
        if r[0] != 1:
            raise InputError(f"{source}: row {k} is not a vertex (leading entry {r[0]})")
        verts.append(tuple(r[1:]))
    return VRep(tuple(verts))


def cg_to_json(sc: Scenario, v) -> dict:
    return {"scenario": scenario_to_json(sc), "cg": fmt_vec(v)}


def cg_from_json(obj: Any, where: str = "cg"):
    sc = scenario_from_json(_field(obj, "scenario", where), f"{where}.scenario")
    return sc, _rats(_field(obj, "cg", where), f"{where}.cg")
