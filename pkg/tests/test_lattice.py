import random
from itertools import combinations

import pytest

from tkindex import intlin
from tkindex.errors import BlockMismatch, InvariantError, ZeroDifferential
from tkindex.lattice import (
    CharacterGroup,
    Flag,
    GModule,
    PolarizingVector,
    Subspace,
    choose_gamma,
    delta_set,
    enumerate_flags,
    fixed_submodule,
    minimal_stabilizer,
    quotient_by_character,
    validate_flag,
)


def brute_stabilizers(V):
    """Saturated spans of every subset of differentials, by direct subset enumeration."""
    n = V.group.n
    diffs = [w.free for w in V.moving]
    out = set()
    for k in range(len(diffs) + 1):
        for sub in combinations(diffs, k):
            out.add(Subspace.from_perp(list(sub), n))
    return out


class TestCharacterGroup:
    def test_weight_reduces_torsion(self):
        G = CharacterGroup(1, (3,))
        assert G.weight((1,), (4,)).torsion == (1,)

    def test_strict_rejects_out_of_range(self):
        G = CharacterGroup(1, (3,))
        with pytest.raises(InvariantError):
            G.weight((1,), (3,), strict=True)

    def test_bad_orders(self):
        with pytest.raises(InvariantError):
            CharacterGroup(1, (1,))
        with pytest.raises(InvariantError):
            CharacterGroup(-1)

    def test_arithmetic(self):
        G = CharacterGroup(2, (2,))
        a, b = G.weight((1, 2), (1,)), G.weight((0, -1), (1,))
        assert G.add(a, b) == G.weight((1, 1), (0,))
        assert G.sub(a, a) == G.zero()
        assert G.scale(a, 3) == G.weight((3, 6), (1,))

    def test_torsion_only_weight_rejected(self):
        G = CharacterGroup(1, (2,))
        with pytest.raises(InvariantError):
            GModule(G, (G.weight((0,), (1,)),))

    def test_zero_weight_allowed(self, S1):
        V = GModule(S1, (S1.zero(), S1.weight((2,))))
        assert V.zero_weights == (S1.zero(),)
        assert V.moving == (S1.weight((2,)),)


class TestDeltaSet:
    def test_empty_module(self, S1):
        assert delta_set(GModule(S1, ())) == [Subspace.full(1)]

    def test_circle(self, circle):
        assert delta_set(circle) == [Subspace.full(1), Subspace.zero(1)]

    def test_hexagonal_has_five(self, hexagonal):
        ds = delta_set(hexagonal)
        assert len(ds) == 5
        assert sorted(h.dim for h in ds) == [0, 1, 1, 1, 2]

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_subset_enumeration(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        G = CharacterGroup(n)
        ws = []
        for _ in range(rng.randint(0, 5)):
            v = tuple(rng.randint(-2, 2) for _ in range(n))
            if any(v):
                ws.append(G.weight(v))
        V = GModule(G, tuple(ws))
        ds = delta_set(V)
        assert set(ds) == brute_stabilizers(V)
        hmin = minimal_stabilizer(V)
        assert hmin in ds
        for a in ds:
            for b in ds:
                assert (a & b) in ds or not V.moving
            assert hmin <= a

    def test_saturation(self):
        h = Subspace.from_perp([(2, 4)], 2)
        assert h.perp_basis == ((1, 2),)
        assert Subspace.from_perp([(1, 2), (2, 4)], 2) == h


class TestFixedSubmodule:
    def test_circle_full(self, circle):
        fixed, moving = fixed_submodule(circle, Subspace.full(1))
        assert fixed.weights == () and moving.weights == circle.weights

    def test_hexagonal_line(self, hexagonal, T2):
        h = Subspace.from_perp([(1, 0)], 2)
        fixed, moving = fixed_submodule(hexagonal, h)
        assert fixed.weights == (T2.weight((1, 0)),)
        assert len(moving.weights) == 2

    def test_zero_subspace_fixes_all(self, hexagonal):
        fixed, moving = fixed_submodule(hexagonal, Subspace.zero(2))
        assert fixed.weights == hexagonal.weights and moving.weights == ()

    def test_partition_and_gamma(self, hexagonal):
        for h in delta_set(hexagonal):
            fixed, moving = fixed_submodule(hexagonal, h)
            assert sorted(fixed.weights + moving.weights) == sorted(hexagonal.weights)
            g = choose_gamma(hexagonal, h)
            assert h.contains(g.integral())
            assert all(g.pair(w) != 0 for w in moving.weights)


class TestMinimalStabilizer:
    def test_examples(self, S1, circle, hexagonal):
        assert minimal_stabilizer(GModule(S1, ())) == Subspace.full(1)
        assert minimal_stabilizer(circle) == Subspace.zero(1)
        assert minimal_stabilizer(hexagonal) == Subspace.zero(2)


class TestQuotient:
    def test_circle_by_one(self, S1):
        q = quotient_by_character(S1, S1.weight((1,)))
        assert q.target == CharacterGroup(0)

    def test_plane_by_axis(self, T2):
        q = quotient_by_character(T2, T2.weight((1, 0)))
        assert q.target == CharacterGroup(1)

    def test_plane_by_two_axis(self, T2):
        q = quotient_by_character(T2, T2.weight((2, 0)))
        assert q.target == CharacterGroup(1, (2,))

    def test_zero_differential(self, T2):
        with pytest.raises(ZeroDifferential):
            quotient_by_character(T2, T2.zero())

    @pytest.mark.parametrize("chi", [(1,), (2,), (3,), (1, 0), (2, 0), (2, 4), (3, -2), (1, 1, 1), (0, 2, 2)])
    def test_homomorphism_section_kernel(self, chi):
        G = CharacterGroup(len(chi))
        c = G.weight(chi)
        q = quotient_by_character(G, c)
        rng = random.Random(hash(chi))
        pts = [G.weight([rng.randint(-5, 5) for _ in chi]) for _ in range(20)]
        assert q.project(c) == q.target.zero()
        for a in pts:
            assert q.project(q.section(q.project(a))) == q.project(a)
            d = G.sub(a, q.section(q.project(a)))
            assert intlin.in_span(d.free, [c.free]) and q.project(d) == q.target.zero()
            for b in pts[:5]:
                assert q.project(G.add(a, b)) == q.target.add(q.project(a), q.project(b))

    def test_with_torsion_source(self):
        G = CharacterGroup(1, (2,))
        q = quotient_by_character(G, G.weight((2,), (1,)))
        # Z + Z/2 modulo (2,1): order of torsion classes is consistent
        for t in range(-4, 5):
            for s in range(2):
                a = G.weight((t,), (s,))
                assert q.project(q.section(q.project(a))) == q.project(a)
        assert q.project(G.weight((2,), (1,))) == q.target.zero()


class TestFlags:
    def test_two_axes(self, T2):
        V = GModule(T2, (T2.weight((1, 0)), T2.weight((0, 1))))
        f = Flag(((T2.weight((1, 0)),), (T2.weight((0, 1)),)), ((1, 0), (0, 1)))
        assert validate_flag(V, f)
        bad = Flag(f.blocks, ((0, 1), (0, 1)))
        assert not validate_flag(V, bad)

    def test_circle_flag(self, circle, S1):
        assert validate_flag(circle, Flag(((S1.weight((1,)),),), ((1,),)))
        flags = enumerate_flags(circle)
        assert len(flags) == 1 and flags[0].betas == (PolarizingVector((1,)),)

    def test_block_mismatch(self, circle, S1):
        with pytest.raises(BlockMismatch):
            validate_flag(circle, Flag(((S1.weight((2,)),),), ((1,),)))

    def test_empty_module_single_empty_flag(self, S1):
        flags = enumerate_flags(GModule(S1, ()))
        assert len(flags) == 1 and flags[0].blocks == ()

    def test_both_orders(self, T2):
        V = GModule(T2, (T2.weight((1, 0)), T2.weight((0, 1))))
        orders = {tuple(b[0] for b in f.blocks) for f in enumerate_flags(V)}
        assert len(orders) == 2

    def test_block_membership_invariant(self, hexagonal):
        flags = enumerate_flags(hexagonal)
        assert len(flags) == 3
        for f in flags:
            assert validate_flag(hexagonal, f)
            for k, block in enumerate(f.blocks):
                for w in block:
                    assert f.betas[k].pair(w) != 0
                    assert all(f.betas[j].pair(w) == 0 for j in range(k + 1, len(f.blocks)))


class TestChooseGamma:
    def test_circle(self, circle):
        assert choose_gamma(circle, Subspace.full(1)) == PolarizingVector((1,))

    def test_vacuous(self, circle):
        assert choose_gamma(circle, Subspace.zero(1)).is_zero()

    def test_hexagonal_full(self, hexagonal):
        g = choose_gamma(hexagonal, Subspace.full(2))
        assert all(g.pair(w) != 0 for w in hexagonal.weights)
