import numpy as np
import pytest
from hypothesis import given, strategies as st

from kaddshap import Coalition, SizeLimitError, binomial, enumerate_powerset
from kaddshap.coalitions import cardinal_lex_masks, characteristic_vector


def labels(order):
    return [c.labels() for c in order]


def test_powerset_m3_matches_cardinal_lex_order():
    order = enumerate_powerset(3)
    assert labels(order) == [
        (), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3),
    ]


def test_powerset_m1_smallest_case():
    order = enumerate_powerset(1)
    assert labels(order) == [(), (1,)]


def test_powerset_m4_rank_of_pair():
    order = enumerate_powerset(4)
    assert len(order) == 16
    # 1-based {2,3} is 0-based members {1,2}
    assert order.rank(Coalition.from_members([1, 2], 4)) == 8


def test_powerset_rejects_out_of_range_m():
    with pytest.raises(SizeLimitError, match="26"):
        enumerate_powerset(27)
    with pytest.raises(SizeLimitError):
        enumerate_powerset(0)


def test_coalition_rejects_out_of_range_members():
    with pytest.raises(ValueError):
        Coalition.from_members([3], 3)
    with pytest.raises(SizeLimitError):
        Coalition(0, 65)


def test_characteristic_vector_paper_example():
    # {2,3} in 1-based labels
    c = Coalition.from_members([1, 2], 3)
    assert c.characteristic_vector().tolist() == [0, 1, 1]


def test_characteristic_vector_extremes():
    assert Coalition.empty(4).characteristic_vector().tolist() == [0, 0, 0, 0]
    assert Coalition.grand(4).characteristic_vector().tolist() == [1, 1, 1, 1]


def test_binomial_values():
    assert binomial(4, 2) == 6
    assert binomial(10, 5) == 252
    for n in range(8):
        assert binomial(n, 0) == 1
    assert binomial(3, 5) == 0


@pytest.mark.parametrize("m", range(1, 11))
def test_cardinality_counts(m):
    order = enumerate_powerset(m)
    assert len(order) == 2**m
    counts = {}
    for c in order:
        counts[c.cardinality()] = counts.get(c.cardinality(), 0) + 1
    for r, count in counts.items():
        assert count == binomial(m, r)


@pytest.mark.parametrize("m", range(1, 9))
def test_rank_is_a_bijection(m):
    order = enumerate_powerset(m)
    assert [order.rank(mask) for mask in order.masks] == list(range(2**m))
    # ranks strictly increase with cardinality
    cards = [mask.bit_count() for mask in order.masks]
    assert cards == sorted(cards)


def test_characteristic_vector_is_injective():
    m = 6
    seen = set()
    for mask in cardinal_lex_masks(m):
        seen.add(tuple(characteristic_vector(mask, m).tolist()))
    assert len(seen) == 2**m


@given(st.integers(min_value=1, max_value=10), st.data())
def test_vector_roundtrips_through_members(m, data):
    members = data.draw(st.sets(st.integers(0, m - 1)))
    c = Coalition.from_members(members, m)
    vec = c.characteristic_vector()
    assert set(c.members()) == members
    assert c.cardinality() == len(members)
    assert [j for j in range(m) if vec[j]] == sorted(members)
