import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tkindex.charring import (
    FiniteCharacter,
    mul,
    one_minus,
    render,
    render_circle,
    restrict_and_grade,
    wedge,
    wedge_conj,
)
from tkindex.lattice import CharacterGroup, GModule, Subspace

G2 = CharacterGroup(2)


def poly(G, pairs):
    return FiniteCharacter(G, {G.weight(w): c for w, c in pairs})


def chars(G):
    w = st.tuples(*[st.integers(-3, 3)] * G.n)
    return st.dictionaries(w, st.integers(-3, 3), max_size=4).map(lambda d: poly(G, d.items()))


def test_telescoping(S1):
    a = poly(S1, [((0,), 1), ((1,), -1)])
    b = poly(S1, [((0,), 1), ((1,), 1), ((2,), 1)])
    assert mul(a, b) == poly(S1, [((0,), 1), ((3,), -1)])


def test_unit(T2):
    a = poly(T2, [((1, 2), 3), ((0, -1), -1)])
    assert mul(FiniteCharacter.one(T2), a) == a


def test_two_factor_expansion(T2):
    got = mul(one_minus(T2, T2.weight((1, 0))), one_minus(T2, T2.weight((0, 1))))
    assert got == poly(T2, [((0, 0), 1), ((1, 0), -1), ((0, 1), -1), ((1, 1), 1)])


def test_wedge_conj_examples(S1, circle, hexagonal):
    assert wedge_conj(circle) == poly(S1, [((0,), 1), ((-1,), -1)])
    assert wedge_conj(GModule(S1, ())) == 1
    # three factors: 8 products, two of them cancel
    assert len(wedge_conj(hexagonal)) == 6
    assert wedge(hexagonal) == wedge_conj(hexagonal).conjugate()


def test_zero_weight_kills_euler_class(S1):
    assert not wedge_conj(GModule(S1, (S1.zero(),)))


def test_restrict_and_grade(S1, T2):
    a = poly(S1, [((0,), 1), ((1,), -1)])
    parts = restrict_and_grade(a, Subspace.full(1))
    assert parts == {(0,): FiniteCharacter.one(S1), (1,): poly(S1, [((1,), -1)])}
    h = Subspace.spanned_by([(0, 1)], 2)
    b = poly(T2, [((0, 0), 1), ((3, 0), -1)])
    assert list(restrict_and_grade(b, h)) == [(0,)]
    assert restrict_and_grade(FiniteCharacter.zero(T2), h) == {}


def test_render(S1, T2):
    assert render(poly(T2, [((1, 0), -1), ((0, 0), 2)])) == "+2 * x^[0,0] -1 * x^[1,0]"
    assert render_circle(poly(S1, [((k,), -1) for k in range(1, 6)])) == "−t −t² −t³ −t⁴ −t⁵"
    assert render_circle(poly(S1, [((-2,), 1), ((0,), 3)])) == "t⁻² +3"
    G = CharacterGroup(1, (2,))
    assert render(FiniteCharacter.monomial(G, G.weight((1,), (1,)))) == "+1 * x^[1; 1]"


@settings(max_examples=60, deadline=None)
@given(chars(G2), chars(G2), chars(G2))
def test_ring_axioms(a, b, c):
    assert mul(a, b) == mul(b, a)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, b + c) == mul(a, b) + mul(a, c)
    assert mul(a, b).conjugate() == mul(a.conjugate(), b.conjugate())


@settings(max_examples=40, deadline=None)
@given(chars(G2), chars(G2))
def test_grading_multiplicative(a, b):
    h = Subspace.spanned_by([(1, 1)], 2)
    pa, pb, pab = restrict_and_grade(a, h), restrict_and_grade(b, h), restrict_and_grade(mul(a, b), h)
    assert sum((v for v in pa.values()), FiniteCharacter.zero(G2)) == a
    expect = {}
    for mu, x in pa.items():
        for nu, y in pb.items():
            key = tuple(p + q for p, q in zip(mu, nu))
            expect[key] = expect.get(key, FiniteCharacter.zero(G2)) + mul(x, y)
    assert {k: v for k, v in expect.items() if v} == pab


def test_wedge_conj_additive(T2, hexagonal):
    W = GModule(T2, (T2.weight((2, -1)),))
    assert wedge_conj(hexagonal.direct_sum(W)) == mul(wedge_conj(hexagonal), wedge_conj(W))
