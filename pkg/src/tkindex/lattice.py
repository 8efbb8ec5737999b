"""Character lattices, weights, modules and the Lie-algebra side.

A compact abelian group ``G = T^n x prod Z/d_i`` is handled entirely through
its character group ``Z^n + sum Z/d_i``.  The Lie algebra ``g`` is identified
with ``Q^n`` and the differential of a weight is its free part.  Subspaces of
``g`` are stored through their saturated annihilator lattice ``L`` in Hermite
normal form, so equal subspaces compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterator, NamedTuple, Sequence

from . import intlin
from .errors import (
    BlockMismatch,
    InvariantError,
    NoAdmissibleGamma,
    NotSubmodule,
    ZeroDifferential,
)


class Weight(NamedTuple):
    free: tuple
    torsion: tuple = ()

    def is_zero(self):
        return not any(self.free) and not any(self.torsion)

    def has_differential(self):
        return any(self.free)


def weight_sort_key(w):
    """Graded lexicographic order: total free degree, then coordinates."""
    return (sum(w.free), w.free, w.torsion)


@dataclass(frozen=True)
class CharacterGroup:
    free_rank: int
    torsion_orders: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion_orders", tuple(int(d) for d in self.torsion_orders))
        if self.free_rank < 0:
            raise InvariantError("free rank must be nonnegative", rank=self.free_rank)
        for d in self.torsion_orders:
            if d < 2:
                raise InvariantError("torsion orders must be >= 2", order=d)

    @property
    def n(self):
        return self.free_rank

    def weight(self, free, torsion=None, *, strict=False):
        """Build a weight; torsion entries are reduced unless ``strict``."""
        free = tuple(int(x) for x in free)
        torsion = tuple(int(x) for x in (torsion if torsion is not None else [0] * len(self.torsion_orders)))
        if len(free) != self.free_rank or len(torsion) != len(self.torsion_orders):
            raise InvariantError("weight shape does not match group", weight=(free, torsion), group=self)
        if strict and any(not 0 <= t < d for t, d in zip(torsion, self.torsion_orders)):
            raise InvariantError("torsion entry out of range", weight=(free, torsion))
        return Weight(free, tuple(t % d for t, d in zip(torsion, self.torsion_orders)))

    def zero(self):
        return Weight((0,) * self.free_rank, (0,) * len(self.torsion_orders))

    def add(self, a, b):
        return Weight(
            tuple(x + y for x, y in zip(a.free, b.free)),
            tuple((x + y) % d for x, y, d in zip(a.torsion, b.torsion, self.torsion_orders)),
        )

    def neg(self, a):
        return Weight(tuple(-x for x in a.free), tuple((-x) % d for x, d in zip(a.torsion, self.torsion_orders)))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, a, k):
        return Weight(tuple(k * x for x in a.free), tuple((k * x) % d for x, d in zip(a.torsion, self.torsion_orders)))

    def sum(self, weights):
        out = self.zero()
        for w in weights:
            out = self.add(out, w)
        return out

    def check(self, w):
        if len(w.free) != self.free_rank or len(w.torsion) != len(self.torsion_orders):
            raise InvariantError("weight shape does not match group", weight=w)
        if any(not 0 <= t < d for t, d in zip(w.torsion, self.torsion_orders)):
            raise InvariantError("torsion entry out of range", weight=w)
        return w

    def torsion_elements(self):
        return product(*(range(d) for d in self.torsion_orders))

    def as_vector(self, w):
        return tuple(w.free) + tuple(w.torsion)


@dataclass(frozen=True)
class GModule:
    """Complex G-module as a multiset of weights plus a trivial real part."""

    group: CharacterGroup
    weights: tuple = ()
    trivial_real_dim: int = 0

    def __post_init__(self):
        ws = []
        for w in self.weights:
            w = Weight(tuple(w[0]), tuple(w[1])) if not isinstance(w, Weight) else w
            self.group.check(w)
            if not w.has_differential() and any(w.torsion):
                raise InvariantError("weight with zero differential and nonzero torsion", weight=w)
            ws.append(w)
        if self.trivial_real_dim < 0:
            raise InvariantError("trivial_real_dim must be nonnegative")
        object.__setattr__(self, "weights", tuple(sorted(ws, key=weight_sort_key)))

    def __len__(self):
        return len(self.weights)

    @property
    def moving(self):
        return tuple(w for w in self.weights if w.has_differential())

    @property
    def zero_weights(self):
        return tuple(w for w in self.weights if not w.has_differential())

    def with_weights(self, weights, trivial_real_dim=None):
        return GModule(self.group, tuple(weights), self.trivial_real_dim if trivial_real_dim is None else trivial_real_dim)

    def conjugate(self):
        return self.with_weights(self.group.neg(w) for w in self.weights)

    def direct_sum(self, other):
        return GModule(self.group, self.weights + other.weights, self.trivial_real_dim + other.trivial_real_dim)

    def minus(self, other):
        """Multiset difference ``self / other``."""
        rest = list(self.weights)
        for w in other.weights:
            try:
                rest.remove(w)
            except ValueError:
                raise NotSubmodule("weight not contained in module", weight=w) from None
        return GModule(self.group, tuple(rest), 0)


@dataclass(frozen=True)
class Subspace:
    """Rational subspace ``h`` of ``g = Q^n`` stored via ``L``, the saturated lattice of ``h^perp``."""

    n: int
    perp_basis: tuple = ()

    @classmethod
    def from_perp(cls, vectors, n):
        return cls(n, intlin.saturate([tuple(v) for v in vectors], n))

    @classmethod
    def full(cls, n):
        return cls(n, ())

    @classmethod
    def zero(cls, n):
        return cls.from_perp([tuple(int(i == j) for j in range(n)) for i in range(n)], n)

    @classmethod
    def spanned_by(cls, vectors, n):
        return cls.from_perp(intlin.nullspace_int([intlin.primitive(v) for v in vectors if any(v)], n), n)

    @property
    def dim(self):
        return self.n - len(self.perp_basis)

    @cached_property
    def basis(self):
        """Integer basis of ``h`` itself."""
        return intlin.nullspace_int(self.perp_basis, self.n) if self.perp_basis else intlin.nullspace_int([], self.n)

    def annihilates(self, free):
        """True when a differential lies in ``h^perp``, i.e. ``h`` acts trivially."""
        return intlin.in_span(tuple(free), self.perp_basis)

    def contains(self, vec):
        return all(intlin.dot(b, vec) == 0 for b in self.perp_basis)

    @cached_property
    def _coords(self):
        if not self.perp_basis:
            eye = [[int(i == j) for j in range(self.n)] for i in range(self.n)]
            return eye
        _M, Minv = intlin.complete_basis(self.perp_basis, self.n)
        return Minv

    def project(self, free):
        """Restriction ``pi_H`` of a free part to ``H = exp(h)``, as a vector of ``Z^dim``."""
        r = len(self.perp_basis)
        Minv = self._coords
        return tuple(sum(free[i] * Minv[i][j] for i in range(self.n)) for j in range(r, self.n))

    def __add__(self, other):
        return Subspace.spanned_by(list(self.basis) + list(other.basis), self.n)

    def __and__(self, other):
        return Subspace.from_perp(list(self.perp_basis) + list(other.perp_basis), self.n)

    def __le__(self, other):
        return all(other.contains(v) for v in self.basis)

    def sort_key(self):
        return (-self.dim, self.perp_basis)


@dataclass(frozen=True)
class PolarizingVector:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    @classmethod
    def zero(cls, n):
        return cls((0,) * n)

    def pair(self, w):
        free = w.free if isinstance(w, Weight) else w
        return sum(Fraction(a) * b for a, b in zip(free, self.coords))

    def __neg__(self):
        return PolarizingVector(tuple(-c for c in self.coords))

    def is_zero(self):
        return not any(self.coords)

    def integral(self):
        return intlin.primitive(self.coords)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class Flag:
    blocks: tuple
    betas: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(sorted(b, key=weight_sort_key)) for b in self.blocks))
        object.__setattr__(
            self, "betas", tuple(b if isinstance(b, PolarizingVector) else PolarizingVector(b) for b in self.betas)
        )


def _differentials(V):
    return [w.free for w in V.moving]


def _flats(diffs, n):
    """All saturated lattices spanned by subsets of ``diffs`` (closure by BFS)."""
    start = intlin.saturate([], n)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for F in frontier:
            for d in diffs:
                if intlin.in_span(d, F):
                    continue
                G = intlin.saturate(list(F) + [d], n)
                if G not in seen:
                    seen.add(G)
                    nxt.append(G)
        frontier = nxt
    return seen


def delta_set(V: GModule):
    """Infinitesimal stabilizers of points of ``V``, sorted from ``g`` downwards."""
    n = V.group.n
    flats = _flats(sorted(set(_differentials(V))), n)
    return sorted((Subspace(n, F) for F in flats), key=Subspace.sort_key)


def minimal_stabilizer(V: GModule) -> Subspace:
    return Subspace.from_perp(_differentials(V), V.group.n)


def fixed_submodule(V: GModule, h: Subspace):
    """Return ``(V^h, V/V^h)``."""
    fixed = [w for w in V.weights if h.annihilates(w.free)]
    moving = [w for w in V.weights if not h.annihilates(w.free)]
    return V.with_weights(fixed), V.with_weights(moving, 0)


@dataclass(frozen=True)
class CharacterQuotient:
    """The restriction ``pi : G^ -> (G_chi)^ = G^/<chi>`` with a set-theoretic section."""

    source: CharacterGroup
    chi: Weight
    target: CharacterGroup
    T: tuple
    Tinv: tuple
    diag: tuple

    def project(self, w):
        v = self.source.as_vector(w)
        N = len(v)
        c = [sum(v[i] * self.T[i][j] for i in range(N)) for j in range(N)]
        r = len(self.diag)
        tors = tuple(c[j] % d for j, d in enumerate(self.diag) if d > 1)
        return Weight(tuple(c[r:]), tors)

    def section(self, theta):
        N = self.source.n + len(self.source.torsion_orders)
        r = len(self.diag)
        c = [0] * N
        tpos = [j for j, d in enumerate(self.diag) if d > 1]
        for j, t in zip(tpos, theta.torsion):
            c[j] = t
        for k, f in enumerate(theta.free):
            c[r + k] = f
        v = [sum(c[i] * self.Tinv[i][j] for i in range(N)) for j in range(N)]
        n = self.source.n
        return self.source.weight(v[:n], v[n:])


def quotient_by_character(Ghat: CharacterGroup, chi: Weight) -> CharacterQuotient:
    Ghat.check(chi)
    if not chi.has_differential():
        raise ZeroDifferential("character has zero differential", chi=chi)
    n, t = Ghat.n, len(Ghat.torsion_orders)
    N = n + t
    rows = [list(chi.free) + list(chi.torsion)]
    for i, d in enumerate(Ghat.torsion_orders):
        rows.append([d if j == n + i else 0 for j in range(N)])
    diag, T, Tinv = intlin.smith(rows, N)
    target = CharacterGroup(N - len(diag), tuple(d for d in diag if d > 1))
    return CharacterQuotient(Ghat, chi, target, tuple(map(tuple, T)), tuple(map(tuple, Tinv)), tuple(diag))


def validate_flag(V: GModule, f: Flag) -> bool:
    moving = sorted(V.moving, key=weight_sort_key)
    flat = sorted((w for b in f.blocks for w in b), key=weight_sort_key)
    if moving != flat:
        raise BlockMismatch("flag blocks do not partition the moving weights")
    if len(f.betas) != len(f.blocks):
        return False
    for k, beta in enumerate(f.betas):
        if any(beta.pair(w) != 0 for b in f.blocks[:k] for w in b):
            return False
        if not f.blocks[k] or any(beta.pair(w) == 0 for w in f.blocks[k]):
            return False
    n = V.group.n
    hmin = minimal_stabilizer(V)
    s = n - hmin.dim
    if len(f.betas) != s:
        return False
    rows = [b.integral() for b in f.betas] + list(hmin.basis)
    return intlin.rank(rows) == n


def _admissible_vector(n, constraints_zero, constraints_nonzero, extra_basis=None):
    """First schedule vector orthogonal to ``constraints_zero`` and not orthogonal to ``constraints_nonzero``."""
    for v in intlin.schedule(n):
        if all(intlin.dot(v, z) == 0 for z in constraints_zero) and all(
            intlin.dot(v, a) != 0 for a in constraints_nonzero
        ):
            return v
    basis = extra_basis if extra_basis is not None else intlin.nullspace_int(constraints_zero, n)
    if not basis:
        return None
    for M in range(2, 64):
        v = [sum(b[i] * M**k for k, b in enumerate(basis)) for i in range(n)]
        if all(intlin.dot(v, a) != 0 for a in constraints_nonzero):
            return tuple(v)
    return None


def choose_gamma(V: GModule, h: Subspace) -> PolarizingVector:
    n = V.group.n
    _fixed, comp = fixed_submodule(V, h)
    if not comp.moving:
        return PolarizingVector.zero(n)
    v = _admissible_vector(n, h.perp_basis, [w.free for w in comp.moving], h.basis)
    if v is None:
        raise NoAdmissibleGamma("no admissible gamma found", subspace=h.perp_basis)
    return PolarizingVector(v)


def _chains(F, weights, n):
    """Maximal chains of weight-spanned flats below ``F`` (a saturated lattice)."""
    inside = [w for w in weights if intlin.in_span(w.free, F)]
    if not F:
        yield [F]
        return
    r = len(F)
    subflats = sorted(G for G in _flats(sorted(set(w.free for w in inside)), n) if len(G) == r - 1)
    for G in subflats:
        for chain in _chains(G, inside, n):
            yield chain + [F]


def enumerate_flags(V: GModule, limit: int = 16) -> list:
    n = V.group.n
    top = intlin.saturate(_differentials(V), n)
    out = []
    for chain in _chains(top, V.moving, n):
        blocks, betas = [], []
        for k in range(1, len(chain)):
            lower, upper = chain[k - 1], chain[k]
            block = [w for w in V.moving if intlin.in_span(w.free, upper) and not intlin.in_span(w.free, lower)]
            beta = _admissible_vector(n, lower, [w.free for w in block])
            if beta is None:
                break
            blocks.append(tuple(block))
            betas.append(PolarizingVector(beta))
        else:
            f = Flag(tuple(blocks), tuple(betas))
            if validate_flag(V, f):
                out.append(f)
        if len(out) >= limit:
            break
    return out
