from itertools import product

import pytest
from hypothesis import given

from conftest import cards
from loctrans.corr import CHSH_SCENARIO
from loctrans.scenario import PartyCard, Scenario, flatten, signaling_allowed, tensor_index


def test_flatten_examples():
    assert flatten(PartyCard((3, 2)), 1, 1) == 0
    assert flatten(PartyCard((3, 2)), 1, 2) == 3
    assert flatten(PartyCard((2, 2)), 2, 2) == 3
    with pytest.raises(IndexError):
        flatten(PartyCard((2, 2)), 3, 1)


def test_tensor_index_examples():
    assert tensor_index(CHSH_SCENARIO, [(1, 1), (1, 1)]) == 0
    # P(11|11), P(12|11), P(11|12), P(12|12), P(21|11), ...
    order = [tensor_index(CHSH_SCENARIO, idx) for idx in [
        [(1, 1), (1, 1)], [(1, 1), (2, 1)], [(1, 1), (1, 2)], [(1, 1), (2, 2)],
        [(2, 1), (1, 1)], [(2, 1), (2, 1)],
    ]]
    assert order == [0, 1, 2, 3, 4, 5]
    assert Scenario.nonsignaling((3, 2), (2, 2)).dim == 20


def test_signaling_examples():
    ns = Scenario.nonsignaling((2, 2), (2, 2))
    assert signaling_allowed(ns, 0, 0) and signaling_allowed(ns, 1, 1)
    assert not signaling_allowed(ns, 0, 1)
    ico = Scenario.fully_signaling((2, 2), (2, 2))
    assert signaling_allowed(ico, 0, 1) and signaling_allowed(ico, 1, 0)
    with pytest.raises(ValueError):
        Scenario([(2, 2)], [(0, 1)])


def test_invalid_cards():
    with pytest.raises(ValueError):
        PartyCard(())
    with pytest.raises(ValueError):
        PartyCard((2, 0))


@given(cards(4, 4))
def test_flatten_is_a_bijection(card):
    positions = [card.flatten(a, x) for a, x in card.indices()]
    assert sorted(positions) == list(range(card.dim))
    for a, x in card.indices():
        assert card.unflatten(card.flatten(a, x)) == (a, x)


@given(cards(3, 3), cards(3, 3), cards(2, 2))
def test_tensor_index_is_mixed_radix(c1, c2, c3):
    sc = Scenario.nonsignaling(c1, c2, c3)
    expected = 0
    for i1, i2, i3 in product(c1.indices(), c2.indices(), c3.indices()):
        assert sc.tensor_index([i1, i2, i3]) == expected
        assert sc.unflatten(expected) == (i1, i2, i3)
        expected += 1
    assert expected == sc.dim
