from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import cards, detmaps
from loctrans.detmap import (
    LEFT_INVERTIBLE,
    NEITHER,
    RELABELING,
    REORDERING,
    RIGHT_INVERTIBLE,
    CapExceeded,
    DetMap,
    NotInvertible,
    classify,
    compose,
    count_maps,
    enumerate_maps,
    factor_pure,
    find_left_inverse,
    find_right_inverse,
    is_left_invertible,
    is_right_invertible,
    relabelings,
    to_matrix,
)
from loctrans.ratlin import RatMatrix
from loctrans.scenario import PartyCard
from loctrans.subspaces import party_basis

C22, C32, C222 = PartyCard((2, 2)), PartyCard((3, 2)), PartyCard((2, 2, 2))

INPUT_FLIP = DetMap(C22, C22, (2, 1), ((1, 2), (1, 2)))
LAMBDA_IF = RatMatrix([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])

EXAMPLE = DetMap(C32, C222, (1, 1, 2), ((1, 2, 2), (1, 1, 2), (2, 1)))
EXAMPLE_MATRIX = RatMatrix([
    [1, 0, 0, 0, 0],
    [0, 1, 1, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 0, 1],
    [0, 0, 0, 1, 0],
])

FINE = DetMap(C22, C32, (1, 2), ((1, 2), (1, 2)))
COARSE = DetMap(C32, C22, (1, 2), ((1, 2, 2), (1, 2)))
FINE_MATRIX = RatMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
COARSE_MATRIX = RatMatrix([[1, 0, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]])


def identity(card):
    return DetMap.identity(card)


def test_matrix_examples():
    assert to_matrix(identity(C32)) == RatMatrix.identity(5)
    assert to_matrix(INPUT_FLIP) == LAMBDA_IF
    assert to_matrix(EXAMPLE) == EXAMPLE_MATRIX
    assert to_matrix(FINE) == FINE_MATRIX
    assert to_matrix(COARSE) == COARSE_MATRIX


def test_composition_examples():
    assert compose(identity(C222), EXAMPLE) == EXAMPLE
    assert compose(INPUT_FLIP, INPUT_FLIP) == identity(C22)
    assert compose(COARSE, FINE) == identity(C22)
    with pytest.raises(ValueError):
        compose(EXAMPLE, EXAMPLE)


def test_factorization_of_example():
    pin, pout = factor_pure(EXAMPLE)
    clone = RatMatrix([
        [1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0],
        [1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0],
        [0, 0, 0, 1, 0], [0, 0, 0, 0, 1],
    ])
    assert to_matrix(pin) == clone
    H = to_matrix(pout)
    assert H.submatrix(range(0, 2), range(0, 3)) == RatMatrix([[1, 0, 0], [0, 1, 1]])
    assert H.submatrix(range(2, 4), range(3, 6)) == RatMatrix([[1, 1, 0], [0, 0, 1]])
    assert H.submatrix(range(4, 6), range(6, 8)) == RatMatrix([[0, 1], [1, 0]])
    assert compose(pout, pin) == EXAMPLE
    assert factor_pure(identity(C32)) == (identity(C32), identity(C32))


def test_classification_examples():
    fine_grain = DetMap(PartyCard((2,)), PartyCard((3,)), (1,), ((1, 2),))
    coarse_grain = DetMap(PartyCard((3,)), PartyCard((2,)), (1,), ((1, 2, 2),))
    assert classify(fine_grain) == LEFT_INVERTIBLE
    assert classify(coarse_grain) == RIGHT_INVERTIBLE
    assert classify(INPUT_FLIP) == RELABELING
    assert classify(DetMap(C32, PartyCard((2, 3)), (2, 1), ((1, 2), (1, 2, 3)))) == REORDERING
    assert classify(DetMap(C22, C22, (1, 1), ((1, 1), (1, 2)))) == NEITHER
    maps = list(enumerate_maps(C22, PartyCard((3, 3, 3))))
    assert len(maps) == 5832
    assert sum(1 for m in maps if is_left_invertible(m)) == 2592


def test_inverse_examples():
    for m in relabelings(C32):
        inv = find_left_inverse(m)
        assert compose(inv, m) == identity(C32) and compose(m, inv) == identity(C32)
        assert find_right_inverse(m) == inv
    left = find_left_inverse(FINE)
    assert compose(left, FINE) == identity(C22)
    right = find_right_inverse(COARSE)
    assert compose(COARSE, right) == identity(C22)
    with pytest.raises(NotInvertible):
        find_left_inverse(COARSE)
    with pytest.raises(NotInvertible):
        find_right_inverse(FINE)


def _enumeration_oracle(src, tgt):
    """Count maps by building every (ξ, ᾱ) and matrix independently."""
    mats = set()
    for xi in product(range(1, src.X + 1), repeat=tgt.X):
        for alphas in product(*(product(range(1, tgt.A(z) + 1), repeat=src.A(x)) for z, x in enumerate(xi, 1))):
            rows = [[0] * src.dim for _ in range(tgt.dim)]
            for z, (x, al) in enumerate(zip(xi, alphas), 1):
                for a, a2 in enumerate(al, 1):
                    rows[tgt.flatten(a2, z)][src.flatten(a, x)] = 1
            mats.add(tuple(map(tuple, rows)))
    return len(mats)


def test_enumeration_counts():
    assert count_maps(C22, PartyCard((3, 3, 3))) == 5832
    assert len(list(enumerate_maps(C22, C22))) == 64 == _enumeration_oracle(C22, C22)
    assert len(list(enumerate_maps(PartyCard((1,)), PartyCard((1,))))) == 1
    with pytest.raises(CapExceeded):
        enumerate_maps(C22, PartyCard((3, 3, 3)), cap=100)


def test_enumeration_order_is_lexicographic_and_distinct():
    maps = list(enumerate_maps(C32, C22))
    keys = [m.key() for m in maps]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys) == _enumeration_oracle(C32, C22)


@given(detmaps(), st.data())
def test_matrix_homomorphism_and_associativity(s, data):
    t = data.draw(detmaps(source=s.target))
    u = data.draw(detmaps(source=t.target))
    assert to_matrix(compose(t, s)) == to_matrix(t) @ to_matrix(s)
    assert compose(u, compose(t, s)) == compose(compose(u, t), s)
    assert compose(identity(s.target), s) == s == compose(s, identity(s.source))


@given(detmaps())
def test_factorization_recomposes(m):
    pin, pout = factor_pure(m)
    assert all(al == tuple(range(1, len(al) + 1)) for al in pin.alphas)
    assert pout.xi == tuple(range(1, pout.target.X + 1))
    assert compose(pout, pin) == m


@given(detmaps(max_inputs=2, max_outputs=2))
def test_classification_matches_exhaustive_search(m):
    backs = list(enumerate_maps(m.target, m.source, cap=None))
    eye = identity(m.source)
    has_left = any(compose(t, m) == eye for t in backs)
    has_right = any(compose(m, t) == identity(m.target) for t in backs)
    assert is_left_invertible(m) == has_left
    assert is_right_invertible(m) == has_right
    if has_left:
        assert compose(find_left_inverse(m), m) == eye
    if has_right:
        assert compose(m, find_right_inverse(m)) == identity(m.target)


@given(detmaps(), st.data())
def test_deterministic_behaviors_stay_deterministic(m, data):
    outs = [data.draw(st.integers(1, a)) for a in m.source.outputs]
    p = [0] * m.source.dim
    for x, a in enumerate(outs, 1):
        p[m.source.flatten(a, x)] = 1
    img = to_matrix(m) @ p
    for z in range(1, m.target.X + 1):
        block = img[m.target.offsets[z - 1]:m.target.offsets[z - 1] + m.target.A(z)]
        assert sorted(block) == [0] * (len(block) - 1) + [1]


def correlation_witness(card: PartyCard, c) -> DetMap:
    """Map sending a nonzero zero-block-sum vector onto a multiple of C^{1|1} of (2)."""
    for x in range(1, card.X + 1):
        off = card.offsets[x - 1]
        block = c[off:off + card.A(x)]
        for a0, v in enumerate(block, 1):
            if v:
                al = tuple(1 if a == a0 else 2 for a in range(1, card.A(x) + 1))
                return DetMap(card, PartyCard((2,)), (x,), (al,))
    raise ValueError("vector is zero")


@given(cards(3, 4, min_outputs=2), st.data())
def test_irreducibility_witness(card, data):
    c = []
    for x in range(1, card.X + 1):
        block = [Fraction(data.draw(st.integers(-4, 4))) for _ in range(card.A(x) - 1)]
        c.extend(block + [-sum(block)])
    assume(any(c))
    m = correlation_witness(card, c)
    img = to_matrix(m) @ c
    target = party_basis(PartyCard((2,))).correlations[0][1]
    k = img[0] / target[0]
    assert k != 0 and img == tuple(k * t for t in target)
