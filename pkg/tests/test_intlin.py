from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tkindex import intlin

vec2 = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(any)


def test_hermite_canonical():
    a = intlin.hermite_rows([(2, 4, 6), (1, 1, 1)], 3)
    b = intlin.hermite_rows([(1, 1, 1), (3, 5, 7)], 3)
    assert a == b


def test_smith_of_two_zero():
    diag, T, Tinv = intlin.smith([(2, 0)], 2)
    assert diag == [2]


def test_witness_examples():
    assert intlin.integer_witness([(-1, 0), (0, 1), (1, 1)], 2) is not None
    assert intlin.integer_witness([(1, 0), (-1, 0)], 2) is None
    assert intlin.saturate([(2, 4)], 2) == ((1, 2),)


def test_schedule_order():
    first = list(intlin.schedule(2, 1))[:4]
    assert first == [(1, 0), (0, 1), (0, -1), (-1, 0)]


@settings(max_examples=80, deadline=None)
@given(st.lists(vec2, min_size=1, max_size=5))
def test_witness_agrees_with_brute_force(vs):
    xi = intlin.integer_witness(vs, 2)
    brute = any(all(a * x + b * y > 0 for a, b in vs) for x, y in product(range(-12, 13), repeat=2))
    if xi is None:
        assert not brute
    else:
        assert all(intlin.dot(v, xi) > 0 for v in vs)


@settings(max_examples=60, deadline=None)
@given(st.lists(vec2, min_size=1, max_size=4), st.lists(vec2, max_size=3))
def test_mixed_feasibility_sound(strict, weak):
    x = intlin.feasible_point(strict, weak, n=2)
    if x is not None:
        assert all(intlin.dot(a, x) > 0 for a in strict)
        assert all(intlin.dot(b, x) >= 0 for b in weak)
    else:
        grid = [(Fraction(i, 2), Fraction(j, 2)) for i in range(-20, 21) for j in range(-20, 21)]
        assert not any(
            all(intlin.dot(a, p) > 0 for a in strict) and all(intlin.dot(b, p) >= 0 for b in weak) for p in grid
        )


def test_nullspace():
    ns = intlin.nullspace_int([(1, 1, 1)], 3)
    assert len(ns) == 2 and all(sum(v) == 0 for v in ns)
