"""Brute-force oracles, written independently of the library's algorithms."""

from itertools import product


def naive_witness(vectors, n, bound=4):
    """Search small integer covectors for one positive on every vector."""
    for xi in product(range(-bound, bound + 1), repeat=n):
        if all(sum(a * b for a, b in zip(v, xi)) > 0 for v in vectors):
            return xi
    raise AssertionError("no small witness")


def count_solutions(group, denominators, residual):
    """#{k >= 0 : sum k_i a_i = residual} by bounded box enumeration."""
    if not denominators:
        return int(residual == group.zero())
    n = group.n
    xi = naive_witness([a.free for a in denominators], n)
    budget = sum(a * b for a, b in zip(residual.free, xi))
    if budget < 0:
        return 0
    ranges = [range(budget // sum(x * y for x, y in zip(a.free, xi)) + 1) for a in denominators]
    hits = 0
    for ks in product(*ranges):
        total = group.zero()
        for k, a in zip(ks, denominators):
            total = group.add(total, group.scale(a, k))
        hits += total == residual
    return hits


def coefficient(phi, mu):
    G = phi.group
    out = phi.finite_part[mu]
    for t in phi.terms:
        out += t.coeff * count_solutions(G, t.denominators, G.sub(mu, t.numerator))
    return out


def table(phi, window):
    return {mu: coefficient(phi, mu) for mu in window.points(phi.group)}


def convolve(p, values, window):
    """(p * f) on ``window`` from a dict ``values`` of f that covers every needed point."""
    G = p.group
    out = {}
    for mu in window.points(G):
        out[mu] = sum(c * values[G.sub(mu, lam)] for lam, c in p.coeffs.items())
    return out


def nonzero(d):
    return {k: v for k, v in d.items() if v}
