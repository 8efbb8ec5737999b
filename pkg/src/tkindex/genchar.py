"""Generalized characters as finite sums of polarized geometric-series terms.

A generalized character is stored as a map from an (oriented, sorted)
denominator multiset ``D`` to a numerator Laurent polynomial ``N``; the part
denotes the expansion of ``N / prod_{a in D} (1 - x^a)`` in non-negative powers
of every ``x^a``.  The expansion only depends on ``D``, so parts with equal
denominators are merged.  ``D = ()`` is the finite part.

Every operation keeps representations normalized: numerators are divided by
denominator factors whenever the division is exact, and parts with equal
denominators are merged.  Two different normalized representations can still
denote the same element; zero and finiteness tests are therefore three-valued.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from . import intlin
from .charring import FiniteCharacter, mul, one_minus
from .errors import (
    InvariantError,
    NotPeriodic,
    NotPolarizable,
    NotSummable,
    ReconstructionUnsupported,
)
from .lattice import (
    CharacterGroup,
    CharacterQuotient,
    GModule,
    PolarizingVector,
    Subspace,
    Weight,
    quotient_by_character,
    weight_sort_key,
)


@lru_cache(maxsize=65536)
def _witness(frees):
    if not frees:
        return ()
    return intlin.integer_witness(frees, len(frees[0]))


def witness_for(denominators):
    """Integer covector positive on every denominator, or ``None``."""
    return _witness(tuple(sorted({a.free for a in denominators})))


def _dkey(denominators):
    return tuple(sorted(denominators, key=weight_sort_key))


@dataclass(frozen=True)
class PolarizedTerm:
    coeff: int
    numerator: Weight
    denominators: tuple
    witness: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "denominators", _dkey(self.denominators))
        if any(not a.has_differential() for a in self.denominators):
            raise InvariantError("denominator weight with zero differential")
        if self.denominators:
            xi = tuple(self.witness) if self.witness else witness_for(self.denominators)
            if xi is None or any(intlin.dot(a.free, xi) <= 0 for a in self.denominators):
                raise InvariantError("polarized term is not pointed", denominators=self.denominators)
            object.__setattr__(self, "witness", tuple(xi))


@dataclass(frozen=True)
class Window:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(int(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(int(x) for x in self.upper))
        if len(self.lower) != len(self.upper) or any(l > u for l, u in zip(self.lower, self.upper)):
            raise InvariantError("window bounds must satisfy lower <= upper", window=(self.lower, self.upper))

    @classmethod
    def cube(cls, n, lo, hi):
        return cls((lo,) * n, (hi,) * n)

    @classmethod
    def parse(cls, text, n=None):
        """Parse ``lo..hi[,lo..hi...]``; a single range is broadcast to rank ``n``."""
        parts = []
        for chunk in text.split(","):
            lo, hi = chunk.split("..")
            parts.append((int(lo), int(hi)))
        if n is not None and len(parts) == 1:
            parts = parts * n
        if n is not None and len(parts) != n:
            raise InvariantError("window rank does not match group", window=text)
        return cls(tuple(p[0] for p in parts), tuple(p[1] for p in parts))

    def contains(self, free):
        return all(l <= x <= u for l, x, u in zip(self.lower, free, self.upper))

    def free_points(self):
        return product(*(range(l, u + 1) for l, u in zip(self.lower, self.upper)))

    def points(self, group):
        for f in self.free_points():
            for t in group.torsion_elements():
                yield Weight(tuple(f), tuple(t))

    def grow(self, k):
        return Window(tuple(l - k for l in self.lower), tuple(u + k for u in self.upper))

    def __str__(self):
        return ",".join(f"{l}..{u}" for l, u in zip(self.lower, self.upper))


def divide_one_minus(N: FiniteCharacter, a: Weight):
    """Exact quotient ``N / (1 - x^a)`` in ``Z[G^]``, or ``None`` if it does not exist."""
    G = N.group
    j = next(i for i, x in enumerate(a.free) if x)
    aj = a.free[j]
    fibers = defaultdict(list)
    for mu, c in N.coeffs.items():
        k = mu.free[j] // aj
        base = G.sub(mu, G.scale(a, k))
        fibers[base].append((k, c))
    out = {}
    for base, entries in fibers.items():
        if sum(c for _, c in entries) != 0:
            return None
        entries.sort()
        acc = 0
        for (k, c), nxt in zip(entries, entries[1:] + [(None, 0)]):
            acc += c
            stop = nxt[0] if nxt[0] is not None else k + 1
            if acc:
                for kk in range(k, stop):
                    out[G.add(base, G.scale(a, kk))] = acc
    return FiniteCharacter(G, out)


def _cancel(N, D):
    """Divide ``N`` by as many factors of ``D`` as possible."""
    D = list(D)
    progress = True
    while progress and D and N:
        progress = False
        for i, a in enumerate(D):
            Q = divide_one_minus(N, a)
            if Q is not None:
                N = Q
                del D[i]
                progress = True
                break
    return N, _dkey(D)


def _normalize(group, parts):
    """Cancel and merge until stable."""
    todo = dict(parts)
    out = {}
    while todo:
        nxt = {}
        for D, N in todo.items():
            if not N:
                continue
            N2, D2 = _cancel(N, D)
            if not N2:
                continue
            if D2 in out:
                merged = out.pop(D2) + N2
                if merged:
                    nxt[D2] = nxt[D2] + merged if D2 in nxt else merged
            elif D2 in nxt:
                merged = nxt.pop(D2) + N2
                if merged:
                    nxt[D2] = merged
            else:
                out[D2] = N2
        # merged parts go round again: their sum may now cancel further
        todo = nxt
    return out


class GenChar:
    """Element of R^-inf(G) in polarized-term representation."""

    __slots__ = ("group", "parts")

    def __init__(self, group: CharacterGroup, parts=None, *, normalized=False):
        self.group = group
        parts = {_dkey(D): N for D, N in (parts or {}).items() if N}
        for D in parts:
            if D and witness_for(D) is None:
                raise NotSummable("denominator set has no common witness", denominators=D)
        self.parts = parts if normalized else _normalize(group, parts)

    @classmethod
    def zero(cls, group):
        return cls(group, {}, normalized=True)

    @classmethod
    def finite(cls, p: FiniteCharacter):
        return cls(p.group, {(): p})

    @classmethod
    def from_terms(cls, group, terms, finite_part=None):
        parts = defaultdict(lambda: FiniteCharacter.zero(group))
        for t in terms:
            parts[t.denominators] = parts[t.denominators] + FiniteCharacter.monomial(group, t.numerator, t.coeff)
        if finite_part is not None:
            parts[()] = parts[()] + finite_part
        return cls(group, dict(parts))

    @property
    def terms(self):
        out = []
        for D in sorted(self.parts, key=lambda d: (len(d), [weight_sort_key(a) for a in d])):
            if not D:
                continue
            xi = witness_for(D)
            for lam, c in self.parts[D].items():
                out.append(PolarizedTerm(c, lam, D, xi))
        return out

    @property
    def finite_part(self):
        return self.parts.get((), FiniteCharacter.zero(self.group))

    def is_finite(self):
        return all(not D for D in self.parts)

    def __add__(self, other):
        parts = dict(self.parts)
        for D, N in other.parts.items():
            parts[D] = parts[D] + N if D in parts else N
        return GenChar(self.group, parts)

    def __neg__(self):
        return GenChar(self.group, {D: -N for D, N in self.parts.items()}, normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        if k == 0:
            return GenChar.zero(self.group)
        return GenChar(self.group, {D: N.scale(k) for D, N in self.parts.items()}, normalized=True)

    def __repr__(self):
        return f"GenChar({len(self.parts)} parts)"


def add(phi1: GenChar, phi2: GenChar) -> GenChar:
    return phi1 + phi2


def negate(phi: GenChar) -> GenChar:
    return -phi


def scalar_mul(k: int, phi: GenChar) -> GenChar:
    return phi.scale(k)


# ---------------------------------------------------------------- counting


_MEMO: dict = {}


def partition_count(group, denominators, r):
    """Number of ``k in N^m`` with ``sum k_i a_i = r`` in the character group."""
    D = _dkey(denominators)
    if not D:
        return 1 if r.is_zero() else 0
    xi = witness_for(D)
    memo = _MEMO.setdefault((group, D), {})
    pairs = [intlin.dot(a.free, xi) for a in D]
    m = len(D)

    def rec(i, res):
        key = (i, res)
        hit = memo.get(key)
        if hit is not None:
            return hit
        budget = intlin.dot(res.free, xi)
        if budget < 0:
            val = 0
        elif i == m - 1:
            a = D[i]
            j = next(t for t, x in enumerate(a.free) if x)
            q, rem = divmod(res.free[j], a.free[j])
            val = 1 if rem == 0 and q >= 0 and group.scale(a, q) == res else 0
        else:
            val = 0
            a = D[i]
            cur = res
            step = pairs[i]
            spent = 0
            while spent <= budget:
                val += rec(i + 1, cur)
                cur = group.sub(cur, a)
                spent += step
        memo[key] = val
        return val

    return rec(0, r)


def coefficient_at(phi: GenChar, mu: Weight) -> int:
    G = phi.group
    total = 0
    for D, N in phi.parts.items():
        for lam, c in N.coeffs.items():
            total += c * partition_count(G, D, G.sub(mu, lam))
    return total


def _enumerate_part(group, D, N, w: Window, out):
    """Accumulate the expansion of ``N / prod(1 - x^a)`` inside ``w`` into ``out``."""
    m = len(D)
    n = group.n
    if not D:
        for lam, c in N.coeffs.items():
            if w.contains(lam.free):
                out[lam] += c
        return
    xi = witness_for(D)
    B = sum(max(x * l, x * u) for x, l, u in zip(xi, w.lower, w.upper))
    allpos = [[all(D[l].free[j] >= 0 for l in range(i, m)) for j in range(n)] for i in range(m + 1)]
    allneg = [[all(D[l].free[j] <= 0 for l in range(i, m)) for j in range(n)] for i in range(m + 1)]

    def dead(i, p):
        for j in range(n):
            if allpos[i][j] and p.free[j] > w.upper[j]:
                return True
            if allneg[i][j] and p.free[j] < w.lower[j]:
                return True
        return False

    def rec(i, p, c):
        if dead(i, p):
            return
        if i == m:
            out[p] += c
            return
        a = D[i]
        cur = p
        while intlin.dot(cur.free, xi) <= B and not dead(i, cur):
            rec(i + 1, cur, c)
            cur = group.add(cur, a)

    for lam, c in N.coeffs.items():
        rec(0, lam, c)


def truncate(phi: GenChar, w: Window) -> FiniteCharacter:
    """Finite character agreeing with ``phi`` on the window (all torsion values) and zero outside."""
    out = defaultdict(int)
    for D, N in phi.parts.items():
        _enumerate_part(phi.group, D, N, w, out)
    return FiniteCharacter(phi.group, {k: v for k, v in out.items() if w.contains(k.free)})


# ---------------------------------------------------------------- products


def mul_finite(p: FiniteCharacter, phi: GenChar) -> GenChar:
    return GenChar(phi.group, {D: mul(p, N) for D, N in phi.parts.items()})


def mul_genchar(phi1: GenChar, phi2: GenChar) -> GenChar:
    G = phi1.group
    parts = {}
    for D1, N1 in phi1.parts.items():
        for D2, N2 in phi2.parts.items():
            D = _dkey(D1 + D2)
            if D and witness_for(D) is None:
                raise NotSummable("term pair has no common witness", left=D1, right=D2)
            N = mul(N1, N2)
            parts[D] = parts[D] + N if D in parts else N
    return GenChar(G, parts)


def polarized_inverse(V: GModule, beta: PolarizingVector) -> GenChar:
    """The inverse of ``prod (1 - x^a)`` expanded in the chamber of ``beta``."""
    G = V.group
    denoms, neg = [], []
    for a in V.weights:
        s = beta.pair(a)
        if s == 0:
            raise NotPolarizable("beta does not act bijectively", weight=a, beta=str(beta))
        if s > 0:
            denoms.append(a)
        else:
            denoms.append(G.neg(a))
            neg.append(a)
    lam = G.neg(G.sum(neg))
    coeff = -1 if len(neg) % 2 else 1
    return GenChar(G, {_dkey(denoms): FiniteCharacter.monomial(G, lam, coeff)})


def index_thom(V: GModule, beta: PolarizingVector) -> GenChar:
    """Index of the pushed Thom class; zero weights contribute Bott factors of index 1."""
    return polarized_inverse(V.with_weights(V.moving).conjugate(), beta)


def sigma_dbar_index(V: GModule, beta: PolarizingVector) -> GenChar:
    return index_thom(V, -beta) - index_thom(V, beta)


# ---------------------------------------------------------------- induction


def delta_series(group, chi):
    """``sum_{k in Z} x^{k chi}`` as two polarized terms."""
    return GenChar(
        group,
        {
            (chi,): FiniteCharacter.one(group),
            (group.neg(chi),): FiniteCharacter.monomial(group, group.neg(chi)),
        },
    )


def induction(phi: GenChar, q: CharacterQuotient) -> GenChar:
    """Pull ``phi`` back along ``q.project``: the result's coefficient at ``mu`` is ``phi(pi(mu))``."""
    G = q.source
    chi = q.chi
    mchi = G.neg(chi)
    parts = {}
    for D, N in phi.parts.items():
        lifted = tuple(q.section(a) for a in D)
        Nl = FiniteCharacter(G, {q.section(lam): c for lam, c in N.coeffs.items()})
        for extra, num in (((chi,), Nl), ((mchi,), Nl.shift(mchi))):
            Dn = _dkey(lifted + extra)
            if witness_for(Dn) is None:
                raise NotSummable("lifted term has no witness with the delta branch", denominators=Dn)
            parts[Dn] = parts[Dn] + num if Dn in parts else num
    return GenChar(G, parts)


def _geometric_prefix(group, a, j):
    """Finite character ``(1 - x^{j a}) / (1 - x^a)``."""
    if j >= 0:
        return FiniteCharacter(group, {group.scale(a, i): 1 for i in range(j)})
    return FiniteCharacter(group, {group.scale(a, i): -1 for i in range(j, 0)})


def invert_induction(phi: GenChar, q, window: Window | None = None, *, _depth=0) -> GenChar:
    """Recover ``psi`` over the quotient group with ``induction(psi, q) == phi``.

    Every part carrying exactly one delta-direction factor ``(1 - x^{+-chi})``
    is rewritten with numerators on the section's fiber representatives; the
    paired branches descend, everything left over must cancel exactly.
    """
    if isinstance(q, Weight):
        q = quotient_by_character(phi.group, q)
    G, H = q.source, q.target
    chi = q.chi
    mchi = G.neg(chi)
    kernel = mul_finite(one_minus(G, chi), phi)
    if is_zero(kernel, _depth=_depth + 1).kind != PROVED_ZERO:
        raise NotPeriodic("(1 - x^chi) * phi is not certified zero")
    j = next(i for i, x in enumerate(chi.free) if x)

    plus = defaultdict(lambda: defaultdict(int))
    minus = defaultdict(lambda: defaultdict(int))
    rest = defaultdict(lambda: FiniteCharacter.zero(G))
    for D, N in phi.parts.items():
        signs = [a for a in D if a == chi or a == mchi]
        others = list(D)
        if len(signs) == 1:
            others.remove(signs[0])
        if len(signs) != 1 or any(not q.project(a).has_differential() for a in others):
            rest[D] = rest[D] + N
            continue
        Dp = _dkey(others)
        ray = signs[0]
        for mu, c in N.coeffs.items():
            theta = q.project(mu)
            base = q.section(theta)
            k = (mu.free[j] - base.free[j]) // chi.free[j]
            if ray == chi:
                plus[Dp][theta] += c
                corr = _geometric_prefix(G, chi, k).shift(base).scale(-c)
            else:
                minus[Dp][theta] += c
                corr = _geometric_prefix(G, mchi, -(k + 1)).shift(G.add(base, mchi)).scale(-c)
            rest[Dp] = rest[Dp] + corr
    for Dp in set(plus) | set(minus):
        for theta in set(plus[Dp]) | set(minus[Dp]):
            diff = minus[Dp][theta] - plus[Dp][theta]
            if diff:
                mono = FiniteCharacter.monomial(G, G.add(q.section(theta), mchi), diff)
                key = _dkey(Dp + (mchi,))
                rest[key] = rest[key] + mono
    leftover = GenChar(G, dict(rest))
    if is_zero(leftover, _depth=_depth + 1).kind != PROVED_ZERO:
        raise ReconstructionUnsupported("periodic remainder not captured by paired delta branches")
    parts = {}
    for Dp, coeffs in plus.items():
        Dq = _dkey(q.project(a) for a in Dp)
        if Dq and witness_for(Dq) is None:
            raise ReconstructionUnsupported("descended denominators are not pointed", denominators=Dq)
        N = FiniteCharacter(H, dict(coeffs))
        parts[Dq] = parts[Dq] + N if Dq in parts else N
    psi = GenChar(H, parts)
    if window is not None:
        back = induction(psi, q)
        if truncate(back, window) != truncate(phi, window):
            raise ReconstructionUnsupported("window round trip failed")
    return psi


# ---------------------------------------------------------------- verdicts

PROVED_ZERO = "ProvedZero"
PROVED_NONZERO = "ProvedNonzero"
PROVED_FINITE = "ProvedFinite"
PROVED_INFINITE = "ProvedInfinite"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: object = None
    reason: str = ""

    def __bool__(self):
        raise TypeError("Verdict has no truth value; compare .kind")


def _clusters(phi: GenChar):
    """Group the non-finite parts into clusters sharing one witness."""
    clusters = []
    for D in sorted((d for d in phi.parts if d), key=lambda d: (len(d), [weight_sort_key(a) for a in d])):
        for cl in clusters:
            if witness_for(cl["denoms"] + D) is not None:
                cl["members"].append(D)
                cl["denoms"] = cl["denoms"] + D
                break
        else:
            clusters.append({"members": [D], "denoms": D})
    return clusters


def _common_fraction(phi, members):
    """Numerator and denominator multiset of the members over a common denominator."""
    G = phi.group
    need = defaultdict(int)
    for D in members:
        cnt = defaultdict(int)
        for a in D:
            cnt[a] += 1
        for a, k in cnt.items():
            need[a] = max(need[a], k)
    common = [a for a in sorted(need, key=weight_sort_key) for _ in range(need[a])]
    total = FiniteCharacter.zero(G)
    for D in members:
        comp = list(common)
        for a in D:
            comp.remove(a)
        N = phi.parts[D]
        for a in comp:
            N = mul(N, one_minus(G, a))
        total = total + N
    return total, common


def _search_nonzero(phi: GenChar, grow=(2, 6)):
    G = phi.group
    if G.n == 0:
        for t in G.torsion_elements():
            w = Weight((), tuple(t))
            if coefficient_at(phi, w):
                return w
        return None
    lams = [lam for N in phi.parts.values() for lam in N.coeffs]
    lo = tuple(min(l.free[j] for l in lams) for j in range(G.n))
    hi = tuple(max(l.free[j] for l in lams) for j in range(G.n))
    for g in grow:
        w = Window(lo, hi).grow(g)
        tr = truncate(phi, w)
        if tr:
            return tr.support()[0]
    return None


_MAX_DESCENT = 3


def _periodic_directions(phi):
    """Denominators occurring with both orientations: candidate periods for descent."""
    seen = {a for D in phi.parts for a in D}
    G = phi.group
    return sorted((a for a in seen if G.neg(a) in seen and a.free > G.neg(a).free), key=weight_sort_key)


def is_zero(phi: GenChar, *, _depth=0) -> Verdict:
    """Three-valued zero test.

    Clusters of parts sharing a witness are compared over a common denominator;
    failing that, a nonzero coefficient is searched near the numerators; failing
    that, ``phi`` is certified to be induced along a period ``chi`` and the
    descended character is tested instead (induction is injective).
    """
    if not phi.parts:
        return Verdict(PROVED_ZERO)
    nonzero_clusters = 0
    if phi.finite_part:
        nonzero_clusters += 1
    for cl in _clusters(phi):
        N, _ = _common_fraction(phi, cl["members"])
        if N:
            nonzero_clusters += 1
    if nonzero_clusters == 0:
        return Verdict(PROVED_ZERO, reason="every witness cluster normalizes to zero")
    w = _search_nonzero(phi)
    if w is not None:
        return Verdict(PROVED_NONZERO, witness=w)
    if _depth < _MAX_DESCENT:
        for chi in _periodic_directions(phi):
            q = quotient_by_character(phi.group, chi)
            try:
                psi = invert_induction(phi, q, _depth=_depth + 1)
            except (NotPeriodic, ReconstructionUnsupported, NotSummable):
                continue
            v = is_zero(psi, _depth=_depth + 1)
            if v.kind == PROVED_ZERO:
                return Verdict(PROVED_ZERO, reason="induced from a character that is zero")
            if v.kind == PROVED_NONZERO:
                return Verdict(PROVED_NONZERO, witness=q.section(v.witness))
    return Verdict(UNKNOWN, reason="clusters nonzero but no nonzero coefficient found in search window")


def _cluster_projection(phi, members, h: Subspace):
    """(status, ray) for one cluster: 'finite', 'infinite' or 'unknown'."""
    G = phi.group
    N, common = _common_fraction(phi, members)
    out = [a for a in common if any(h.project(a.free))]
    for a in out:
        Q = divide_one_minus(N, a)
        if Q is None:
            return ("unknown" if G.torsion_orders else "infinite"), a
        N = Q
    return "finite", None


def projected_support_finite(phi: GenChar, h: Subspace) -> Verdict:
    clusters = _clusters(phi)
    status = []
    for cl in clusters:
        st, ray = _cluster_projection(phi, cl["members"], h)
        status.append((st, ray, cl))
    open_ = [s for s in status if s[0] != "finite"]
    if not open_:
        return Verdict(PROVED_FINITE)
    for st, ray, cl in open_:
        if st != "infinite":
            continue
        others = [a.free for st2, _, cl2 in open_ if cl2 is not cl for a in cl2["denoms"]]
        strict = [a.free for a in cl["denoms"]]
        if not others or intlin.feasible_point(strict, [tuple(-x for x in o) for o in others], n=phi.group.n):
            return Verdict(PROVED_INFINITE, witness=ray, reason="uncancelled denominator with nonzero restriction")
    return Verdict(UNKNOWN, reason="infinite clusters could not be separated")
