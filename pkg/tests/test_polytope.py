from fractions import Fraction
from itertools import product

import pytest

from loctrans.corr import (
    CHSH_SCENARIO,
    causal_scenario,
    chsh,
    enumerate_deterministic,
    evaluate,
    pr_box,
    uniform_behavior,
)
from loctrans.polytope import (
    HRep,
    VRep,
    affine_dim,
    causal_vertices,
    classify_facets,
    dd_facets,
    dd_vertices,
    deterministic_vertices,
    double_description,
    extremal,
    facet_families,
    ns_hrep,
)
from loctrans.ratlin import RatMatrix, integer_rank, rank
from loctrans.scenario import PartyCard, Scenario

CUBE = HRep(
    RatMatrix([], 3),
    (),
    RatMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]),
    (1, 1, 1, 0, 0, 0),
)


def test_affine_dimensions():
    assert affine_dim(ns_hrep(CHSH_SCENARIO)) == 8
    assert affine_dim(ns_hrep(Scenario.nonsignaling((3, 3, 3), (2, 2)))) == 20
    assert affine_dim(ns_hrep(Scenario.nonsignaling((2, 2)))) == 2


def test_extremality_examples():
    h = ns_hrep(CHSH_SCENARIO)
    for P in enumerate_deterministic(CHSH_SCENARIO):
        assert extremal(P, h)
    assert extremal(pr_box(), h)
    assert not extremal(uniform_behavior(CHSH_SCENARIO), h)


def test_cube():
    v = dd_vertices(CUBE)
    assert sorted(v.vertices) == sorted(tuple(map(Fraction, p)) for p in product((0, 1), repeat=3))
    h = dd_facets(v)
    assert h.ineq_A.nrows == 6


def test_single_party_cube_classes():
    sc = Scenario.nonsignaling((2, 2, 2))
    h = ns_hrep(sc)
    v = dd_vertices(h)
    assert len(v) == 8
    classes = classify_facets(dd_facets(v), sc)
    assert [c.orbit_size for c in classes] == [6]


def test_chsh_ns_round_trip():
    h = ns_hrep(CHSH_SCENARIO)
    v = dd_vertices(h)
    assert len(v) == 24
    h2 = dd_facets(v)
    assert h2.ineq_A.nrows == 16
    for p in v.vertices:
        assert h.contains(p) and h2.contains(p)
        assert extremal(p, h)
    v2 = dd_vertices(h2)
    assert set(v2.vertices) == set(v.vertices)


def test_local_polytope_classes():
    v = deterministic_vertices(CHSH_SCENARIO)
    h = dd_facets(v)
    assert h.ineq_A.nrows == 24
    classes = classify_facets(h, CHSH_SCENARIO)
    assert sorted(c.orbit_size for c in classes) == [8, 16]
    assert max(evaluate(chsh(), pr_box()) for _ in [0]) == 4
    # facets are tight on enough affinely independent vertices
    dim = 8
    for r, c in zip(h.ineq_A.rows, h.ineq_c):
        tight = [[1] + list(p) for p in v.vertices if sum(a * b for a, b in zip(r, p)) == c]
        assert rank(RatMatrix(tight)) >= dim


def test_binary_causal_vertices():
    v = causal_vertices((2, 2), (2, 2))
    assert len(v) == 64 + 64 - 16
    h = dd_facets(v)
    fam = facet_families(h, causal_scenario(2), {})
    assert fam["other"] == h.ineq_A.nrows


def test_causal_vertex_count_by_inclusion_exclusion():
    assert len(causal_vertices((2, 2), (3, 3))) == 324 + 144 - 36


def test_double_description_limits():
    with pytest.raises(RuntimeError):
        dd_vertices(ns_hrep(CHSH_SCENARIO), ray_limit=3)


def test_extremal_rejects_outside_points():
    h = ns_hrep(CHSH_SCENARIO)
    with pytest.raises(ValueError):
        extremal(pr_box() * 2, h)


def test_classification_requires_closed_sets():
    v = deterministic_vertices(CHSH_SCENARIO)
    h = dd_facets(v)
    partial = HRep(h.eq_A, h.eq_b, h.ineq_A.submatrix(rows=[0]), h.ineq_c[:1])
    with pytest.raises(ValueError):
        classify_facets(partial, CHSH_SCENARIO)
