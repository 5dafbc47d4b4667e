import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decophase.intlinalg import (SingularMatrix, block_diag, det, identity,
                                 integer_solve, mat_mul, mat_vec,
                                 rational_inverse, smith_normal_form)


def square(n, lo=-6, hi=6):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n),
                    min_size=n, max_size=n)


@given(square(3))
@settings(max_examples=200, deadline=None)
def test_snf_decomposition(m):
    snf = smith_normal_form(m)
    assert mat_mul(mat_mul(snf.U, m), snf.V) == snf.D
    # unimodular transforms
    assert abs(det(snf.U)) == 1
    assert abs(det(snf.V)) == 1
    d = snf.diagonal
    # divisibility chain on nonzero pivots, zeros trail
    nz = [x for x in d if x]
    assert d[:len(nz)] == nz
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
        assert a > 0


@given(square(3))
@settings(max_examples=100, deadline=None)
def test_det_multiplicative(m):
    snf = smith_normal_form(m)
    assert det(m) * det(snf.U) * det(snf.V) == math.prod(snf.diagonal)


@given(square(3, -4, 4), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
@settings(max_examples=150, deadline=None)
def test_integer_solve_roundtrip(m, x):
    b = mat_vec(m, x)
    sol = integer_solve(m, b)
    assert sol is not None
    assert mat_vec(m, sol) == b


def test_integer_solve_no_solution():
    assert integer_solve([[2, 0], [0, 2]], [1, 0]) is None


def test_rational_inverse_exact():
    m = [[0, 2], [2, 0]]
    inv = rational_inverse(m)
    assert inv == [[Fraction(0), Fraction(1, 2)], [Fraction(1, 2), Fraction(0)]]
    assert mat_mul(m, inv) == [[1, 0], [0, 1]]


def test_rational_inverse_singular():
    with pytest.raises(SingularMatrix):
        rational_inverse([[1, 1], [1, 1]])


def test_block_diag():
    b = block_diag([[[1]], [[2, 3], [4, 5]]])
    assert b == [[1, 0, 0], [0, 2, 3], [0, 4, 5]]


def test_identity_det():
    assert det(identity(4)) == 1
