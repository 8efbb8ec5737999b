"""The representation ring R(G) = Z[G^] of finite characters."""

from __future__ import annotations

from collections import defaultdict

from .lattice import CharacterGroup, GModule, Subspace, Weight, weight_sort_key


class FiniteCharacter:
    """Finitely supported integer function on the character group.

    Immutable by convention: arithmetic returns new objects and ``coeffs`` is
    never mutated after construction.  Zero coefficients are never stored.
    """

    __slots__ = ("group", "coeffs", "_hash")

    def __init__(self, group: CharacterGroup, coeffs=None):
        self.group = group
        self.coeffs = {w: c for w, c in (coeffs or {}).items() if c}
        self._hash = None

    @classmethod
    def monomial(cls, group, w, c=1):
        return cls(group, {w: c})

    @classmethod
    def one(cls, group):
        return cls(group, {group.zero(): 1})

    @classmethod
    def zero(cls, group):
        return cls(group, {})

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            return self == FiniteCharacter(self.group, {self.group.zero(): other})
        return isinstance(other, FiniteCharacter) and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __getitem__(self, w):
        return self.coeffs.get(w, 0)

    def __len__(self):
        return len(self.coeffs)

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: weight_sort_key(kv[0]))

    def support(self):
        return [w for w, _ in self.items()]

    def __add__(self, other):
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0) + c
        return FiniteCharacter(self.group, out)

    def __neg__(self):
        return FiniteCharacter(self.group, {w: -c for w, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return FiniteCharacter(self.group, {w: k * c for w, c in self.coeffs.items()})

    def shift(self, w0):
        add = self.group.add
        return FiniteCharacter(self.group, {add(w, w0): c for w, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def conjugate(self):
        neg = self.group.neg
        return FiniteCharacter(self.group, {neg(w): c for w, c in self.coeffs.items()})

    def __repr__(self):
        return f"FiniteCharacter({render(self)})"


def mul(a: FiniteCharacter, b: FiniteCharacter) -> FiniteCharacter:
    """Convolution product."""
    add = a.group.add
    out = defaultdict(int)
    for w1, c1 in a.coeffs.items():
        for w2, c2 in b.coeffs.items():
            out[add(w1, w2)] += c1 * c2
    return FiniteCharacter(a.group, out)


def one_minus(group, w):
    """The factor ``1 - x^w``."""
    zero = group.zero()
    if w == zero:
        return FiniteCharacter.zero(group)
    return FiniteCharacter(group, {zero: 1, w: -1})


def wedge_conj(V: GModule, conjugate=True) -> FiniteCharacter:
    """Alternating exterior character of ``V`` (conjugated by default).

    ``conjugate=True`` gives ``prod (1 - x^-a)``; ``False`` gives ``prod (1 - x^a)``.
    """
    G = V.group
    out = FiniteCharacter.one(G)
    for w in V.weights:
        out = mul(out, one_minus(G, G.neg(w) if conjugate else w))
    return out


def wedge(V: GModule) -> FiniteCharacter:
    return wedge_conj(V, conjugate=False)


def restrict_and_grade(a: FiniteCharacter, h: Subspace) -> dict:
    """Split ``a`` by the restriction of its support to ``H = exp(h)``."""
    parts = defaultdict(dict)
    for w, c in a.coeffs.items():
        parts[h.project(w.free)][w] = c
    return {mu: FiniteCharacter(a.group, cs) for mu, cs in sorted(parts.items())}


_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def _fmt_weight(w):
    free = ",".join(str(x) for x in w.free)
    if w.torsion:
        return f"[{free}; " + ",".join(str(x) for x in w.torsion) + "]"
    return f"[{free}]"


def render(a: FiniteCharacter) -> str:
    """Signed monomial list ``c * x^[a1,...,an; t1,...]`` in graded-lex order."""
    if not a:
        return "0"
    return " ".join(f"{c:+d} * x^{_fmt_weight(w)}" for w, c in a.items())


def render_circle(a: FiniteCharacter) -> str:
    """Compact rendering for rank-one torsion-free groups, e.g. ``−t −t² −t³``."""
    if not a:
        return "0"
    out = []
    for i, (w, c) in enumerate(a.items()):
        k = w.free[0]
        mono = "" if k == 0 else ("t" if k == 1 else "t" + str(k).translate(_SUP))
        mag = abs(c)
        body = (str(mag) if (mag != 1 or not mono) else "") + mono
        sign = "−" if c < 0 else ("" if i == 0 else "+")
        out.append(sign + body)
    return " ".join(out)


def render_auto(a: FiniteCharacter) -> str:
    G = a.group
    if G.n == 1 and not G.torsion_orders:
        return render_circle(a)
    return render(a)
