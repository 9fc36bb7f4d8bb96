import json
from fractions import Fraction

import pytest
from hypothesis import given

from loctrans import io as fio
from loctrans.corr import (
    CHSH_SCENARIO,
    Behavior,
    BellExpression,
    chsh,
    gyni,
    pr_box,
    uniform_behavior,
)
from loctrans.detmap import DetMap
from loctrans.polytope import HRep, VRep, causal_vertices, ns_hrep
from loctrans.ratlin import RatMatrix
from loctrans.scenario import PartyCard, Scenario
from loctrans.subspaces import from_cg, to_cg

from conftest import cards, detmaps, small_fractions


def _rt(obj):
    return json.loads(fio.dumps(obj))


def test_rationals_are_strings():
    d = fio.behavior_to_json(pr_box())
    assert all(isinstance(v, str) for v in d["coeffs"])
    assert d["coeffs"][:2] == ["1/2", "0"]


@pytest.mark.parametrize("P", [pr_box(), uniform_behavior(CHSH_SCENARIO)])
def test_behavior_round_trip(P):
    assert fio.behavior_from_json(_rt(fio.behavior_to_json(P))) == P


@pytest.mark.parametrize("phi", [chsh(), gyni()])
def test_expression_round_trip(phi):
    assert fio.expression_from_json(_rt(fio.expression_to_json(phi))) == phi


@given(cards(max_inputs=3, max_outputs=3).flatmap(lambda s: cards(max_inputs=3, max_outputs=3).flatmap(lambda t: detmaps(s, t))))
def test_detmap_round_trip(m):
    for base in (0, 1):
        assert fio.detmap_from_json(_rt(fio.detmap_to_json(m, base)), base) == m


def test_behavior_cg_round_trip():
    for P in (pr_box(), uniform_behavior(CHSH_SCENARIO)):
        sc, v = fio.cg_from_json(_rt(fio.cg_to_json(P.scenario, to_cg(P))))
        assert from_cg(sc, v) == P


def test_ine_byte_stable():
    h = ns_hrep(CHSH_SCENARIO)
    text = fio.write_ine(h)
    h2 = fio.hrep_from_json(_rt(fio.hrep_to_json(fio.read_ine(text))))
    assert fio.write_ine(h2) == text


def test_ext_reimport():
    v = causal_vertices((2, 2), (2, 2))
    v2 = fio.read_ext(fio.write_ext(v))
    assert v2.vertices == v.vertices
    assert fio.vrep_from_json(_rt(fio.vrep_to_json(v2))).vertices == v.vertices


def test_hrep_with_only_equalities():
    h = fio.hrep_from_json({"equalities": {"A": [["1", "1"]], "b": ["1"]}, "inequalities": {"A": [], "c": []}})
    assert h.ambient_dim == 2 and h.ineq_A.nrows == 0


def test_malformed_json_reports_position():
    with pytest.raises(fio.InputError, match="line 2, column"):
        fio.loads('{"a": 1,\n  oops}')


def test_bad_rational_reports_field():
    d = fio.behavior_to_json(pr_box())
    d["coeffs"][3] = "1/0"
    with pytest.raises(fio.InputError, match=r"coeffs\[3\]"):
        fio.behavior_from_json(d)
    d["coeffs"][3] = 0.5
    with pytest.raises(fio.InputError, match=r"coeffs\[3\]"):
        fio.behavior_from_json(d)


def test_missing_field():
    with pytest.raises(fio.InputError, match="missing field 'coeffs'"):
        fio.behavior_from_json({"scenario": fio.scenario_to_json(CHSH_SCENARIO)})


def test_ext_rejects_rays():
    with pytest.raises(fio.InputError, match="not a vertex"):
        fio.read_ext("V-representation\nbegin\n1 2 rational\n 0 1\nend\n")


def test_ine_row_width():
    with pytest.raises(fio.InputError, match="line 4"):
        fio.read_ine("H-representation\nbegin\n1 3 rational\n 1 0\nend\n")


def test_dumps_keeps_flat_arrays_inline():
    text = fio.dumps({"v": ["1", "2"], "m": [["1"], ["2"]]})
    assert '"v": ["1", "2"]' in text
