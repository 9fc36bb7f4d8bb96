from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import cards, detmaps
from loctrans.corr import (
    CHSH_SCENARIO,
    Behavior,
    DetBehaviorSpec,
    behavior_from_function,
    deterministic_behavior,
    enumerate_deterministic,
    pr_box,
    uniform_behavior,
)
from loctrans.detmap import to_matrix
from loctrans.io import fmt_matrix
from loctrans.ratlin import RatMatrix, dot, kron_vec, rank, solve, Infeasible
from loctrans.scenario import PartyCard, Scenario
from loctrans.subspaces import (
    C,
    NONSIGNALING,
    NORMALIZATION_FIXED,
    NORMALIZATION_FORBIDDEN,
    S,
    SIGNALING_ALLOWED,
    SIGNALING_FORBIDDEN,
    Z,
    cg_dims,
    cg_matrices,
    classify_component,
    decompose_behavior,
    from_cg,
    party_basis,
    party_dual_basis,
    projectors,
    to_cg,
    uniform_product,
)

F = Fraction
C32 = PartyCard((3, 2))
C22 = PartyCard((2, 2))

G_PRINTED = [
    ["0", "1", "0", "0"],
    ["0", "0", "1", "0"],
    ["1", "-1", "-1", "0"],
    ["0", "0", "0", "1"],
    ["1", "0", "0", "-1"],
]
GP_TIMES_12 = [
    [6, 6, 6, 6, 6],
    [10, -2, -2, 2, 2],
    [-2, 10, -2, 2, 2],
    [3, 3, 3, 9, -3],
]


def vec(*vals, scale=1):
    return tuple(F(v) / scale for v in vals)


def test_basis_example():
    b = party_basis(C32)
    assert b.uniform == vec(F(1, 3), F(1, 3), F(1, 3), F(1, 2), F(1, 2))
    assert b.signaling == (vec(F(1, 3), F(1, 3), F(1, 3), F(-1, 2), F(-1, 2)),)
    corr = dict(b.correlations)
    assert corr[(1, 1)] == vec(1, 0, -1, 0, 0, scale=3)
    assert corr[(2, 1)] == vec(0, 1, -1, 0, 0, scale=3)
    assert corr[(1, 2)] == vec(0, 0, 0, 1, -1, scale=2)


def test_dual_basis_example():
    d = party_dual_basis(C32)
    assert d.traceout == vec(1, 1, 1, 1, 1, scale=2)
    assert d.omegas == (vec(1, 1, 1, -1, -1, scale=2),)
    chi = dict(d.chis)
    assert chi[(1, 1)] == vec(2, -1, -1, 0, 0)
    assert chi[(2, 1)] == vec(-1, 2, -1, 0, 0)
    assert chi[(1, 2)] == vec(0, 0, 0, 1, -1)


@given(st.fractions(0, 1), st.fractions(0, 1))
def test_binary_correlators(p1, p2):
    P = (p1, 1 - p1, p2, 1 - p2)
    chi = dict(party_dual_basis(C22).chis)
    assert dot(chi[(1, 1)], P) == p1 - (1 - p1)
    assert dot(chi[(1, 2)], P) == p2 - (1 - p2)


def test_projector_examples():
    pz, pc, ps = projectors(PartyCard((1, 1)))
    assert pc.is_zero()
    assert pz + ps == RatMatrix.identity(2)
    pz, pc, _ = projectors(C22)
    b = party_basis(C22)
    span = RatMatrix.from_columns([b.uniform] + [v for _, v in b.correlations])
    P = pz + pc
    assert rank(P) == 3
    assert P @ span == span
    assert rank(span.hstack(P)) == 3


def test_component_classes():
    ns = Scenario.nonsignaling(C22, C22)
    assert classify_component(ns, (S, C)) == SIGNALING_FORBIDDEN
    ab = Scenario([C22, C22], [(0, 1)])
    assert classify_component(ab, (S, C)) == SIGNALING_ALLOWED
    assert classify_component(ab, (C, S)) == SIGNALING_FORBIDDEN
    assert classify_component(ns, (Z, Z)) == NORMALIZATION_FIXED
    assert classify_component(ns, (Z, S)) == NORMALIZATION_FORBIDDEN
    assert classify_component(ns, (C, C)) == NONSIGNALING
    with pytest.raises(ValueError):
        classify_component(ns, (Z,))


def test_decomposition_examples():
    comps = decompose_behavior(pr_box())
    uu = kron_vec(party_basis(C22).uniform, party_basis(C22).uniform)
    assert comps[(Z, Z)] == uu
    corr = dict(party_basis(C22).correlations)
    cc = [F(0)] * 16
    for x, y in product((1, 2), repeat=2):
        term = kron_vec(corr[(1, x)], corr[(1, y)])
        cc = [u + (-1) ** ((x - 1) * (y - 1)) * t for u, t in zip(cc, term)]
    assert comps[(C, C)] == tuple(cc)
    assert all(not any(v) for k, v in comps.items() if k not in ((Z, Z), (C, C)))

    comps = decompose_behavior(uniform_behavior(CHSH_SCENARIO))
    assert [k for k, v in comps.items() if any(v)] == [(Z, Z)]

    sig = behavior_from_function(Scenario([(1, 1), (2,)], [(0, 1)]), lambda o, i: 1 if o[1] == i[0] else 0)
    comps = decompose_behavior(sig)
    assert any(comps[(S, C)])
    assert not any(comps[(C, S)])


def test_printed_collins_gisin_matrices():
    G, Gp = cg_matrices(C32)
    assert fmt_matrix(G) == G_PRINTED
    assert fmt_matrix(Gp) == fmt_matrix(RatMatrix(GP_TIMES_12).scale(F(1, 12)))
    G2, Gp2 = cg_matrices(C22)
    assert Gp2 @ G2 == RatMatrix.identity(3)
    pz, pc, _ = projectors(C22)
    assert G2 @ Gp2 == pz + pc
    assert cg_dims(CHSH_SCENARIO) == (3, 3)


def test_collins_gisin_of_pr_and_uniform():
    v = to_cg(pr_box())
    # order: (1, P_A(1|1), P_A(1|2)) ⊗ (1, P_B(1|1), P_B(1|2))
    # joint terms P(11|xy): 1/2 except 0 for x = y = 2
    assert v == vec(1, F(1, 2), F(1, 2), F(1, 2), F(1, 2), F(1, 2), F(1, 2), F(1, 2), 0)
    assert from_cg(CHSH_SCENARIO, v) == pr_box()
    u = to_cg(uniform_behavior(CHSH_SCENARIO))
    assert u == vec(1, F(1, 2), F(1, 2), F(1, 2), F(1, 4), F(1, 4), F(1, 2), F(1, 4), F(1, 4))
    with pytest.raises(ValueError):
        from_cg(CHSH_SCENARIO, [2] + [0] * 8)


def _contraction_table(card):
    b = party_basis(card)
    d = party_dual_basis(card)
    assert dot(d.traceout, b.uniform) == 1
    for _, cv in b.correlations:
        assert dot(d.traceout, cv) == 0
    for sv in b.signaling:
        assert dot(d.traceout, sv) == 0
    for (k1, chi) in d.chis:
        assert dot(chi, b.uniform) == 0
        for (k2, cv) in b.correlations:
            assert dot(chi, cv) == (1 if k1 == k2 else 0)
        for sv in b.signaling:
            assert dot(chi, sv) == 0
    for i, om in enumerate(d.omegas):
        assert dot(om, b.uniform) == 0
        for _, cv in b.correlations:
            assert dot(om, cv) == 0
        for j, sv in enumerate(b.signaling):
            assert dot(om, sv) == (1 if i == j else 0)


def _projector_laws(card):
    pz, pc, ps = projectors(card)
    for p in (pz, pc, ps):
        assert p @ p == p
    assert pz + pc + ps == RatMatrix.identity(card.dim)
    assert (pz @ pc).is_zero() and (pc @ ps).is_zero() and (ps @ pz).is_zero()


@given(cards(4, 5))
def test_contraction_table(card):
    _contraction_table(card)


@given(cards(4, 5))
def test_projector_laws(card):
    _projector_laws(card)


@given(cards(4, 5))
def test_collins_gisin_identities(card):
    G, Gp = cg_matrices(card)
    pz, pc, _ = projectors(card)
    assert Gp @ G == RatMatrix.identity(G.ncols)
    assert G @ Gp == pz + pc


def _invariance(m):
    L = to_matrix(m)
    pz, pc, _ = projectors(m.source)
    pz2, pc2, _ = projectors(m.target)
    assert pc2 @ L @ pc == L @ pc
    assert (pz2 + pc2) @ L @ (pz + pc) == L @ (pz + pc)
    d, d2 = party_dual_basis(m.source), party_dual_basis(m.target)
    omegas = list(d.omegas)
    with_tau = omegas + [d.traceout]
    for om in d2.omegas:
        _in_span(L.vecmat(om), omegas)
    _in_span(L.vecmat(d2.traceout), with_tau)


def _in_span(v, vectors):
    if not vectors:
        assert not any(v)
        return
    solve(RatMatrix.from_columns(vectors), v)


@given(detmaps(max_inputs=3, max_outputs=4))
def test_upper_triangular_invariance(m):
    _invariance(m)


@given(cards(4, 4), st.data())
def test_normalized_behavior_is_uniform_plus_correlation(card, data):
    p = []
    for x in range(1, card.X + 1):
        w = [data.draw(st.integers(0, 4)) for _ in range(card.A(x))]
        assume(sum(w))
        p.extend(F(t, sum(w)) for t in w)
    pz, pc, ps = projectors(card)
    assert pz @ p == party_basis(card).uniform
    assert (ps @ p) == (F(0),) * card.dim


@given(st.lists(cards(2, 3, min_outputs=2), min_size=1, max_size=3), st.data())
def test_deterministic_behaviors_have_full_correlation_components(party_cards, data):
    sc = Scenario.nonsignaling(*party_cards)
    funcs = []
    for card in party_cards:
        table = {x: data.draw(st.integers(1, card.A(x))) for x in range(1, card.X + 1)}
        funcs.append(lambda x, t=table: t[x])
    P = deterministic_behavior(DetBehaviorSpec.from_functions(sc, funcs))
    comps = decompose_behavior(P)
    for label in product((Z, C), repeat=sc.n):
        assert any(comps[label])
    assert sum((Behavior(sc, v) for v in comps.values()), Behavior(sc, [0] * sc.dim)) == P


@given(cards(2, 3), cards(2, 3), st.data())
def test_collins_gisin_round_trip(c1, c2, data):
    sc = Scenario.nonsignaling(c1, c2)
    # random nonsignaling behavior: mixture of deterministic boxes
    boxes = list(enumerate_deterministic(sc))
    w = [data.draw(st.integers(0, 3)) for _ in boxes]
    assume(sum(w))
    P = sum((b * F(k, sum(w)) for b, k in zip(boxes, w)), Behavior(sc, [0] * sc.dim))
    assert from_cg(sc, to_cg(P)) == P
