"""Randomized and exhaustive verification suites emitting JSON-line reports.

Every suite is deterministic given its seed.  A check passes only from
definite sub-verdicts; ``Unknown`` propagates as ``unknown``.  Instances are
drawn from the desk-scale envelope: rank <= 3, at most 6 weights, coordinates
in [-3, 3].
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from . import intlin
from .charring import FiniteCharacter, one_minus, wedge, wedge_conj
from .errors import NotPeriodic, TKError
from .genchar import (
    PROVED_NONZERO,
    PROVED_ZERO,
    UNKNOWN as UNDECIDED,
    GenChar,
    Window,
    coefficient_at,
    index_thom,
    induction,
    invert_induction,
    is_zero,
    mul_finite,
    polarized_inverse,
    sigma_dbar_index,
    truncate,
)
from .ktheory import (
    PROVED_IN,
    PROVED_OUT,
    WINDOW_EQUAL,
    flag_generators,
    flag_index,
    in_DM,
    in_F,
    mother_formula_check,
    thom_generators,
)
from .lattice import (
    CharacterGroup,
    GModule,
    PolarizingVector,
    Subspace,
    choose_gamma,
    delta_set,
    fixed_submodule,
    quotient_by_character,
)
from .serialize import dumps, jsonable

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"
DEFAULT_WINDOW = 12


@dataclass
class Report:
    suite: str
    instance: dict
    checks: list = field(default_factory=list)
    timing: float | None = None

    def add(self, name, verdict, witness=None):
        self.checks.append({"check": name, "verdict": verdict, "witness": jsonable(witness)})

    @property
    def verdict(self):
        kinds = {c["verdict"] for c in self.checks}
        return FAIL if FAIL in kinds else (UNKNOWN if UNKNOWN in kinds else PASS)

    def lines(self, timing=False):
        for c in self.checks:
            obj = {"suite": self.suite, "instance": jsonable(self.instance), **c}
            if timing and self.timing is not None:
                obj["seconds"] = round(self.timing, 4)
            yield dumps(obj)


def any_fail(reports):
    return any(r.verdict == FAIL for r in reports)


# ------------------------------------------------------------------ random instances


def random_weight(rng, G, lo=-3, hi=3):
    while True:
        free = tuple(rng.randint(lo, hi) for _ in range(G.n))
        if any(free):
            return G.weight(free, [rng.randrange(d) for d in G.torsion_orders])


def random_module(rng, G, max_weights=6):
    k = rng.randint(1, max_weights)
    return GModule(G, tuple(random_weight(rng, G) for _ in range(k)))


def random_beta(rng, V, tries=200):
    n = V.group.n
    for _ in range(tries):
        b = tuple(rng.randint(-3, 3) for _ in range(n))
        if all(intlin.dot(b, w.free) != 0 for w in V.moving):
            return PolarizingVector(b)
    return None


def random_instance(rng, max_rank=3, max_weights=6):
    """Admissible ``(V, beta)`` pair over a random torus of rank ``<= max_rank``."""
    while True:
        G = CharacterGroup(rng.randint(1, max_rank))
        V = random_module(rng, G, max_weights)
        beta = random_beta(rng, V)
        if beta is not None:
            return V, beta


def random_finite(rng, G, size=3, lo=-3, hi=3):
    coeffs = {}
    for _ in range(rng.randint(1, size)):
        w = G.weight([rng.randint(lo, hi) for _ in range(G.n)], [rng.randrange(d) for d in G.torsion_orders])
        coeffs[w] = coeffs.get(w, 0) + rng.choice([-2, -1, 1, 2])
    p = FiniteCharacter(G, coeffs)
    return p if p else FiniteCharacter.one(G)


def random_genchar(rng, G, max_weights=2):
    """A nonzero element: finite character, or finite multiple of a pushed Thom index."""
    if G.n == 0 or rng.random() < 0.3:
        return GenChar.finite(random_finite(rng, G))
    for _ in range(50):
        V = GModule(G, tuple(random_weight(rng, G, -2, 2) for _ in range(rng.randint(1, max_weights))))
        beta = random_beta(rng, V)
        if beta is not None:
            return mul_finite(random_finite(rng, G, 2, -1, 1), index_thom(V, beta))
    return GenChar.finite(random_finite(rng, G))


# ------------------------------------------------------------------ helpers


def _zero_check(report, name, phi):
    v = is_zero(phi)
    if v.kind == PROVED_ZERO:
        report.add(name, PASS)
    elif v.kind == PROVED_NONZERO:
        report.add(name, FAIL, {"weight": v.witness, "coefficient": coefficient_at(phi, v.witness)})
    else:
        report.add(name, UNKNOWN, v)


def _window_equal(report, name, a, b, w):
    ta, tb = truncate(a, w), truncate(b, w)
    diff = ta - tb
    if not diff:
        report.add(name, PASS, {"window": str(w)})
    else:
        mu = diff.support()[0]
        report.add(name, FAIL, {"window": str(w), "weight": mu, "left": ta[mu], "right": tb[mu]})


def _membership(report, name, v):
    if v.kind == PROVED_IN:
        report.add(name, PASS)
    elif v.kind == PROVED_OUT:
        report.add(name, FAIL, v.witness)
    else:
        report.add(name, UNKNOWN, v.witness)


def _window(n, half):
    return Window.cube(n, -half, half)


def _timed(fn):
    def wrapped(*args, **kwargs):
        t0 = time.perf_counter()
        reports = fn(*args, **kwargs)
        dt = time.perf_counter() - t0
        for r in reports:
            r.timing = dt / max(len(reports), 1)
        return reports

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


# ------------------------------------------------------------------ suites


@_timed
def check_inverse_identity(trials=20, max_rank=3, max_weights=6, seed=0, instances=None):
    """``wedge(V) * [wedge V]^{-1}_beta`` must reduce to the finite character 1."""
    rng = random.Random(seed)
    reports = []
    todo = list(instances) if instances is not None else [random_instance(rng, max_rank, max_weights) for _ in range(trials)]
    for V, beta in todo:
        r = Report("inverse-identity", {"group": V.group, "module": V, "beta": beta})
        if any(beta.pair(w) == 0 for w in V.weights):
            r.add("admissible", UNKNOWN, "skipped: beta vanishes on a weight")
            reports.append(r)
            continue
        prod = mul_finite(wedge(V), polarized_inverse(V, beta))
        one = FiniteCharacter.one(V.group)
        if prod.is_finite() and prod.finite_part == one:
            r.add("reduces-to-one", PASS)
        else:
            v = is_zero(prod - GenChar.finite(one))
            r.add("reduces-to-one", FAIL if v.kind == PROVED_NONZERO else UNKNOWN, v)
        reports.append(r)
    return reports


@_timed
def check_thom_pm(trials=10, window=DEFAULT_WINDOW, seed=0, instances=None, max_rank=3, max_weights=6):
    """Euler class kills the Cauchy-Riemann index; the index is the difference of the two Thom indices."""
    rng = random.Random(seed)
    todo = list(instances) if instances is not None else [random_instance(rng, max_rank, max_weights) for _ in range(trials)]
    reports = []
    for V, beta in todo:
        w = _window(V.group.n, window)
        r = Report("thom-pm", {"group": V.group, "module": V, "beta": beta, "window": str(w)})
        sig = sigma_dbar_index(V, beta)
        _zero_check(r, "euler-annihilates", mul_finite(wedge_conj(V), sig))
        ta = truncate(sig, w)
        tb = truncate(index_thom(V, -beta), w) - truncate(index_thom(V, beta), w)
        if ta == tb:
            r.add("window-difference", PASS, {"window": str(w)})
        else:
            mu = (ta - tb).support()[0]
            r.add("window-difference", FAIL, {"weight": mu, "left": ta[mu], "right": tb[mu]})
        pts = list(w.free_points())
        sample = [pts[i] for i in sorted(rng.sample(range(len(pts)), min(20, len(pts))))]
        bad = [p for p in sample if coefficient_at(sig, V.group.weight(p)) != ta[V.group.weight(p)]]
        r.add("pointwise-vs-window", FAIL if bad else PASS, {"weight": bad[0]} if bad else None)
        reports.append(r)
    return reports


@_timed
def check_exact_sequence(chi=None, trials=10, window=DEFAULT_WINDOW, seed=0, rank=None):
    """Induction along ``G_chi -> G``: injective, lands in the kernel of ``1 - x^chi``, and inverts."""
    rng = random.Random(seed)
    reports = []
    for i in range(trials):
        if chi is None:
            G = CharacterGroup(rank or rng.randint(1, 2))
            c = random_weight(rng, G)
        else:
            c = chi
            G = CharacterGroup(len(c.free))
        q = quotient_by_character(G, c)
        H = q.target
        phi = random_genchar(rng, H)
        w = _window(G.n, window)
        r = Report("exact-sequence", {"group": G, "chi": c, "quotient": H, "phi": phi, "window": str(w)})
        ind = induction(phi, q)
        tr = truncate(ind, w)
        zphi = is_zero(phi)
        if zphi.kind != PROVED_NONZERO:
            r.add("injective", UNKNOWN, zphi)
        else:
            r.add("injective", PASS if tr else FAIL, {"window": str(w)})
        _zero_check(r, "image-in-kernel", mul_finite(one_minus(G, c), ind))
        try:
            psi = invert_induction(ind, q)
        except TKError as e:
            r.add("kernel-in-image", UNKNOWN, e.as_dict())
        else:
            back = truncate(induction(psi, q), w)
            if back != tr:
                mu = (back - tr).support()[0]
                r.add("kernel-in-image", FAIL, {"weight": mu, "left": back[mu], "right": tr[mu]})
            else:
                r.add("kernel-in-image", PASS, {"window": str(w)})
        thetas = [q.project(random_weight(rng, G)) for _ in range(5)]
        r.add("restriction-onto", PASS if all(q.project(q.section(t)) == t for t in thetas) else FAIL, thetas)
        try:
            invert_induction(GenChar.finite(FiniteCharacter.one(G)), q)
            r.add("finite-rejected", FAIL, "constant 1 accepted as periodic")
        except NotPeriodic:
            r.add("finite-rejected", PASS)
        reports.append(r)
    return reports


@_timed
def check_generators_membership(V, flag_limit=8, window=DEFAULT_WINDOW, thom_limit=8):
    """Thom indices lie in the generalized module; flag indices in the Dahmen-Micchelli module."""
    w = _window(V.group.n, window)
    reports = []
    for gamma in thom_generators(V, thom_limit):
        r = Report("generators-membership", {"module": V, "thom": gamma, "window": str(w)})
        _membership(r, "thom-in-F", in_F(index_thom(V, gamma), V))
        reports.append(r)
    for f in flag_generators(V, flag_limit):
        r = Report("generators-membership", {"module": V, "flag": f, "window": str(w)})
        idx = flag_index(V, f)
        _membership(r, "flag-in-DM", in_DM(idx, V))
        _membership(r, "DM-in-F", in_F(idx, V))
        reports.append(r)
    return reports


def decomposition_test_basis(V, w=None, per_level=3):
    """Pairs ``(h, Phi_h)`` with ``Phi_h`` in the Dahmen-Micchelli module of ``V^h``.

    Constants and one shifted constant at the top level; below it, flag
    indices of ``V^h`` and their unit translates, kept only while they stay
    independent on the window (flag indices alone are usually dependent over
    ``Z``; they generate over ``R(G)``).
    """
    G = V.group
    n = G.n
    w = w or _window(n, 6)
    units = [G.zero()] + [G.weight(tuple(int(i == j) for j in range(n))) for i in range(n)]
    out = []
    for h in delta_set(V):
        Vh, _ = fixed_submodule(V, h)
        if h == Subspace.full(n):
            cands = [GenChar.finite(FiniteCharacter.monomial(G, u)) for u in units[:2]]
        else:
            flags = [flag_index(Vh, f) for f in flag_generators(Vh, 4)]
            cands = [mul_finite(FiniteCharacter.monomial(G, u), phi) for u in units for phi in flags]
        chosen = []
        for phi in cands:
            if len(chosen) >= per_level:
                break
            if window_rank(chosen + [phi], w) == len(chosen) + 1:
                chosen.append(phi)
        out.extend((h, phi) for phi in chosen)
    return out


def window_rank(phis, w):
    rows = []
    for phi in phis:
        tr = truncate(phi, w)
        rows.append([tr[p] for p in w.points(phi.group)])
    return intlin.rank(rows)


@_timed
def check_decomposition(V, gammas=None, window=10, splittings=True):
    """The decomposition map on a test basis, the product identity over stabilizer pairs, induction compatibility."""
    from .ktheory import decomposition_map

    gammas = dict(gammas or {})
    n = V.group.n
    w = _window(n, window)
    deltas = delta_set(V)
    for h in deltas:
        gammas.setdefault(h, choose_gamma(V, h))
    reports = []
    basis = decomposition_test_basis(V, w)
    r = Report("decomposition", {"module": V, "window": str(w), "basis_size": len(basis)})
    images = [decomposition_map({h: phi}, V, gammas) for h, phi in basis]
    for k, img in enumerate(images):
        _membership(r, f"image-{k}-in-F", in_F(img, V))
    nonzero = [img for img in images if img.parts]
    if not nonzero:
        r.add("independent", PASS, "all images zero; skipped")
    else:
        rk = window_rank(images, w)
        r.add("independent", PASS if rk == len(images) else FAIL, {"rank": rk, "count": len(images)})
    reports.append(r)

    mw = _window(n, min(window, 8))
    by_h = {}
    for h, phi in basis:
        by_h.setdefault(h, phi)
    r = Report("decomposition", {"module": V, "window": str(mw), "mother_pairs": len(deltas) ** 2})
    for a in deltas:
        for h in deltas:
            v = mother_formula_check(V, a, h, gammas[h], by_h[h], mw)
            label = f"mother[{_hlabel(a)}|{_hlabel(h)}]"
            if v.kind in (PROVED_ZERO, WINDOW_EQUAL):
                r.add(label, PASS, v.kind)
            else:
                r.add(label, FAIL, v)
    reports.append(r)

    if splittings:
        reports.extend(_induction_compatibility(V, w))
    return reports


def _hlabel(h):
    return ";".join(",".join(str(x) for x in row) for row in h.perp_basis) or "g"


def _induction_compatibility(V, w):
    reports = []
    seen = set()
    for chi in V.moving:
        if chi in seen:
            continue
        seen.add(chi)
        q = quotient_by_character(V.group, chi)
        W = list(V.weights)
        W.remove(chi)
        images = [q.project(x) for x in W]
        if any(not x.has_differential() and any(x.torsion) for x in images):
            continue
        Wq = GModule(q.target, tuple(images))
        cands = [flag_index(Wq, f) for f in flag_generators(Wq, 2)]
        cands.append(GenChar.finite(FiniteCharacter.one(q.target)))
        r = Report("decomposition", {"module": V, "chi": chi, "quotient_module": Wq})
        tag = ",".join(map(str, chi.free))
        for k, phi in enumerate(cands):
            a = in_DM(phi, Wq).kind
            b = in_DM(induction(phi, q), V).kind
            if UNDECIDED in (a, b):
                r.add(f"induction-dm[{tag}][{k}]", UNKNOWN, {"quotient": a, "induced": b})
            else:
                r.add(f"induction-dm[{tag}][{k}]", PASS if a == b else FAIL, {"quotient": a, "induced": b})
        reports.append(r)
    return reports


# ------------------------------------------------------------------ battery

SUITES = ("inverse-identity", "thom-pm", "exact-sequence", "generators-membership", "decomposition")


def named_modules():
    S1, T2 = CharacterGroup(1), CharacterGroup(2)
    return {
        "circle": GModule(S1, (S1.weight((1,)),)),
        "circle2": GModule(S1, (S1.weight((1,)), S1.weight((1,)))),
        "hexagonal": GModule(T2, (T2.weight((1, 0)), T2.weight((0, 1)), T2.weight((1, 1)))),
    }


def run_suite(name, seed=0, trials=None, window=None, chi=None, module=None, limit=None):
    mods = named_modules()
    if name == "inverse-identity":
        return check_inverse_identity(trials=trials or 20, seed=seed)
    if name == "thom-pm":
        return check_thom_pm(trials=trials or 10, window=window or 6, seed=seed)
    if name == "exact-sequence":
        return check_exact_sequence(chi=chi, trials=trials or 6, window=window or 8, seed=seed)
    if name == "generators-membership":
        targets = [module] if module is not None else [mods["circle"], mods["circle2"], mods["hexagonal"]]
        return [r for V in targets for r in check_generators_membership(V, flag_limit=limit or 8, window=window or DEFAULT_WINDOW)]
    if name == "decomposition":
        targets = [module] if module is not None else [mods["circle"], mods["hexagonal"]]
        return [r for V in targets for r in check_decomposition(V, window=window or 6)]
    raise KeyError(name)


def run_battery(seed=0):
    return [r for name in SUITES for r in run_suite(name, seed=seed)]
