import math

import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from zetamoments.combinatorics import (
    HalfPermutation,
    difference_table,
    enumerate_xi,
    make_shift_vector,
    xi_size,
)


@pytest.mark.parametrize("k", range(1, 7))
def test_xi_size_and_order(k):
    xi = enumerate_xi(k)
    assert len(xi) == xi_size(k) == math.comb(2 * k, k)
    assert xi == sorted(xi)
    assert len(set(xi)) == len(xi)


@given(st.integers(1, 6), st.data())
def test_s_index_antisymmetric(k, data):
    sigma = data.draw(st.sampled_from(enumerate_xi(k)))
    assert sigma.swapped().s_index == -sigma.s_index
    assert sigma.swapped().swapped() == sigma


@pytest.mark.parametrize("k", range(1, 6))
def test_s_index_sums_to_zero(k):
    assert sum(s.s_index for s in enumerate_xi(k)) == 0


@given(st.integers(1, 6), st.data())
def test_difference_table(k, data):
    sigma = data.draw(st.sampled_from(enumerate_xi(k)))
    m = difference_table(sigma).m
    assert m.shape == (k, k)
    assert 0 not in m
    assert abs(m).max() <= 2 * k - 1
    for i in range(k):
        for j in range(k):
            assert m[i, j] == sigma.first_half[i] - sigma.second_half[j]


def test_half_permutation_validation():
    with pytest.raises(ValueError):
        HalfPermutation((1, 2), (3,))
    with pytest.raises(ValueError):
        HalfPermutation((2, 1), (3, 4))
    with pytest.raises(ValueError):
        HalfPermutation((1, 2), (2, 3))
    assert HalfPermutation.from_first_half(2, (3, 1)) == HalfPermutation((1, 3), (2, 4))


def test_shift_vector():
    v = make_shift_vector(3, mpfr("1e-10"))
    assert len(v.entries) == 6
    assert v.at(4) == 4 * v.delta
    with pytest.raises(ValueError):
        make_shift_vector(2, 0)
