"""Exact integer and rational linear algebra used by the lattice layer.

Everything here works on plain tuples/lists of ``int`` or ``Fraction``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import gcd

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp


def _xgcd(a, b):
    """Return (g, x, y) with a*x + b*y = g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hermite_rows(rows, ncols):
    """Row-style Hermite normal form of an integer matrix, zero rows dropped.

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``, so two
    matrices with the same integer row lattice give identical output.
    """
    A = [list(r) for r in rows if any(r)]
    out = []
    col = 0
    while A and col < ncols:
        nz = [i for i, r in enumerate(A) if r[col] != 0]
        if not nz:
            col += 1
            continue
        piv = A[nz[0]]
        for i in nz[1:]:
            r = A[i]
            g, x, y = _xgcd(piv[col], r[col])
            a, b = piv[col] // g, r[col] // g
            new_piv = [x * p + y * q for p, q in zip(piv, r)]
            new_r = [-b * p + a * q for p, q in zip(piv, r)]
            piv, A[i] = new_piv, new_r
        if piv[col] < 0:
            piv = [-v for v in piv]
        A = [r for j, r in enumerate(A) if j != nz[0] and any(r)]
        out.append((col, piv))
        col += 1
    # reduce entries above pivots
    for k in range(len(out)):
        ck, pk = out[k]
        for j in range(k):
            cj, rj = out[j]
            q = rj[ck] // pk[ck]
            if q:
                out[j] = (cj, [a - q * b for a, b in zip(rj, pk)])
    return tuple(tuple(r) for _, r in out)


def smith(rows, ncols):
    """Smith decomposition ``D = S * M * T`` of an integer matrix.

    Returns ``(diag, T, Tinv)`` where ``diag`` lists the nonzero invariant
    factors (absolute values) and ``T`` is the unimodular column transform as a
    list of rows.
    """
    if not rows:
        eye = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
        return [], eye, [r[:] for r in eye]
    M = Matrix([list(r) for r in rows])
    D, _S, T = smith_normal_decomp(M)
    diag = []
    for i in range(min(D.shape)):
        if D[i, i] != 0:
            diag.append(abs(int(D[i, i])))
    Tinv = T.inv()
    T = [[int(T[i, j]) for j in range(ncols)] for i in range(ncols)]
    Tinv = [[int(Tinv[i, j]) for j in range(ncols)] for i in range(ncols)]
    return diag, T, Tinv


def saturate(rows, ncols):
    """HNF basis of ``span_Q(rows) & Z^ncols``."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return ()
    diag, _T, Tinv = smith(rows, ncols)
    return hermite_rows(Tinv[: len(diag)], ncols)


def complete_basis(basis, ncols):
    """Unimodular ``(M, Minv)`` whose first rows span the saturated lattice ``basis``.

    ``v @ Minv`` gives coordinates of ``v`` in the rows of ``M``; the trailing
    coordinates vanish exactly on ``span(basis)``.
    """
    diag, T, Tinv = smith(list(basis), ncols)
    if any(d != 1 for d in diag):
        raise ValueError("basis does not span a saturated lattice")
    return Tinv, T


def rank(rows):
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return 0
    return Matrix(rows).rank()


def in_span(v, rows):
    if not any(v):
        return True
    return rank(list(rows) + [list(v)]) == rank(rows)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def primitive(v):
    """Scale a rational vector to a primitive integer vector with the same direction."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def nullspace_int(rows, ncols):
    """Integer basis (saturated) of ``{x : rows . x = 0}``."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return hermite_rows([[int(i == j) for j in range(ncols)] for i in range(ncols)], ncols)
    ns = Matrix(rows).nullspace()
    vecs = [primitive([Fraction(str(x)) for x in v]) for v in ns]
    return saturate(vecs, ncols)


def feasible_point(strict, nonstrict=(), n=None):
    """Find rational ``x`` with ``a.x > 0`` for ``a`` in strict, ``b.x >= 0`` for ``b`` in nonstrict.

    Exact Fourier-Motzkin elimination with back substitution; returns a tuple
    of Fractions or ``None`` when the homogeneous system is infeasible.
    """
    strict = [tuple(Fraction(x) for x in a) for a in strict]
    nonstrict = [tuple(Fraction(x) for x in b) for b in nonstrict]
    if n is None:
        n = len(strict[0]) if strict else (len(nonstrict[0]) if nonstrict else 0)
    # constraints as (coeffs, is_strict); homogeneous so constant term is 0
    system = [(a, True) for a in strict] + [(b, False) for b in nonstrict]
    stages = []
    cur = system
    for var in range(n - 1, -1, -1):
        stages.append(cur)
        pos = [c for c in cur if c[0][var] > 0]
        neg = [c for c in cur if c[0][var] < 0]
        zero = [c for c in cur if c[0][var] == 0]
        nxt = list(zero)
        seen = set(c[0] for c in zero)
        for p, ps in pos:
            for q, qs in neg:
                cp, cq = p[var], -q[var]
                comb = tuple(cq * a + cp * b for a, b in zip(p, q))
                g = max((abs(x) for x in comb), default=0)
                if g:
                    comb = tuple(x / g for x in comb)
                key = (comb, ps or qs)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append((comb, ps or qs))
        cur = _prune(nxt)
    # all variables eliminated: rows are 0 > 0 or 0 >= 0
    if any(s for _, s in cur):
        return None
    x = [Fraction(0)] * n
    for var in range(n):
        cons = stages[n - 1 - var]
        lows, highs = [], []
        for a, s in cons:
            if a[var] == 0:
                continue
            rest = sum(a[j] * x[j] for j in range(var))
            bound = -rest / a[var]
            (lows if a[var] > 0 else highs).append((bound, s))
        lo = max((b for b, _ in lows), default=None)
        hi = min((b for b, _ in highs), default=None)
        if lo is None and hi is None:
            val = Fraction(0)
        elif hi is None:
            val = lo + 1
        elif lo is None:
            val = hi - 1
        elif lo == hi:
            val = lo
        else:
            val = (lo + hi) / 2
        x[var] = val
    if all(dot(a, x) > 0 for a in strict) and all(dot(b, x) >= 0 for b in nonstrict):
        return tuple(x)
    return None


def _prune(system):
    out, seen = [], set()
    for a, s in system:
        if not any(a):
            if s:
                return [(a, s)]
            continue
        if (a, s) in seen:
            continue
        seen.add((a, s))
        out.append((a, s))
    return out


def integer_witness(vectors, n):
    """Primitive integer ``xi`` with ``<v, xi> > 0`` for every ``v``, or ``None``."""
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return tuple([0] * n)
    s = [sum(v[i] for v in vectors) for i in range(n)]
    if all(dot(v, s) > 0 for v in vectors):
        return primitive(s)
    pt = feasible_point(vectors, n=n)
    if pt is None:
        return None
    return primitive(pt)


def schedule(n, max_norm=6):
    """Deterministic search schedule over nonzero integer vectors of ``Z^n``.

    Ordered by max-norm, then number of nonzero entries, then reverse
    lexicographic order so that positive entries come first.
    """
    for r in range(1, max_norm + 1):
        layer = [v for v in product(range(-r, r + 1), repeat=n) if max(map(abs, v)) == r]
        layer.sort(key=lambda v: (sum(1 for x in v if x), tuple(-x for x in v)))
        yield from layer
