"""Generator classes of equivariant K-theory of a linear space, identified with their indices.

A :class:`KClass` is an ``R(G)``-combination of generator tags.  Thom tags
carry a polarizing vector acting bijectively on the moving part of ``V``;
flag tags carry a validated :class:`~tkindex.lattice.Flag`.  The Bott factor of
the trivial part has index 1 and is dropped.

Membership tests return a :class:`~tkindex.genchar.Verdict` whose ``kind`` is
``ProvedIn``, ``ProvedOut`` or ``Unknown``; ``witness`` names the stabilizer
and sub-verdict responsible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import intlin
from .charring import FiniteCharacter, wedge_conj
from .errors import GammaNotAdmissible, InvariantError
from .genchar import (
    PROVED_FINITE,
    PROVED_INFINITE,
    PROVED_NONZERO,
    PROVED_ZERO,
    UNKNOWN,
    GenChar,
    Verdict,
    Window,
    index_thom,
    is_zero,
    mul_finite,
    mul_genchar,
    polarized_inverse,
    projected_support_finite,
    sigma_dbar_index,
    truncate,
)
from .lattice import (
    Flag,
    GModule,
    PolarizingVector,
    Subspace,
    choose_gamma,
    delta_set,
    enumerate_flags,
    fixed_submodule,
    minimal_stabilizer,
    validate_flag,
)

PROVED_IN = "ProvedIn"
PROVED_OUT = "ProvedOut"
WINDOW_EQUAL = "WindowEqual"


@dataclass(frozen=True)
class ThomGen:
    gamma: PolarizingVector


@dataclass(frozen=True)
class FlagGen:
    flag: Flag


@dataclass(frozen=True)
class KClass:
    module: GModule
    combo: tuple = ()

    def __post_init__(self):
        V = self.module
        for tag, coeff in self.combo:
            if isinstance(tag, ThomGen):
                if any(tag.gamma.pair(w) == 0 for w in V.moving):
                    raise GammaNotAdmissible("gamma vanishes on a moving weight", gamma=str(tag.gamma))
            elif isinstance(tag, FlagGen):
                if not validate_flag(V, tag.flag):
                    raise InvariantError("flag conditions fail", flag=tag.flag)
            else:
                raise InvariantError("unknown generator tag", tag=tag)
            if coeff.group != V.group:
                raise InvariantError("coefficient over a different group")

    @classmethod
    def thom(cls, V, gamma, coeff=None):
        gamma = gamma if isinstance(gamma, PolarizingVector) else PolarizingVector(gamma)
        return cls(V, ((ThomGen(gamma), coeff or FiniteCharacter.one(V.group)),))

    @classmethod
    def flag(cls, V, flag, coeff=None):
        return cls(V, ((FlagGen(flag), coeff or FiniteCharacter.one(V.group)),))

    def __add__(self, other):
        if self.module != other.module:
            raise InvariantError("classes live on different modules")
        return KClass(self.module, self.combo + other.combo)


def flag_index(V: GModule, flag: Flag) -> GenChar:
    """Product over blocks of the Cauchy-Riemann indices ``sigma(V_k, beta_k)``."""
    out = GenChar.finite(FiniteCharacter.one(V.group))
    for block, beta in zip(flag.blocks, flag.betas):
        out = mul_genchar(out, sigma_dbar_index(V.with_weights(block, 0), beta))
    return out


def index_kclass(kappa: KClass) -> GenChar:
    V = kappa.module
    total = GenChar.zero(V.group)
    for tag, coeff in kappa.combo:
        if isinstance(tag, ThomGen):
            idx = index_thom(V.with_weights(V.moving, 0), tag.gamma)
        else:
            idx = flag_index(V, tag.flag)
        total = total + mul_finite(coeff, idx)
    return total


def thom_generators(V: GModule, limit: int = 16):
    """One polarizing vector per chamber met along the search schedule (up to ``limit``)."""
    n = V.group.n
    moving = [w.free for w in V.moving]
    if not moving:
        return [PolarizingVector.zero(n)]
    seen, out = set(), []
    first = choose_gamma(V, Subspace.full(n))
    for v in [tuple(first.integral())] + list(intlin.schedule(n)):
        signs = tuple(intlin.dot(v, a) > 0 for a in moving)
        if any(intlin.dot(v, a) == 0 for a in moving) or signs in seen:
            continue
        seen.add(signs)
        out.append(PolarizingVector(v))
        if len(out) >= limit:
            break
    return out


def flag_generators(V: GModule, limit: int = 16):
    return enumerate_flags(V, limit=limit)


def restrict_index(phi: GenChar, V: GModule, W: GModule) -> GenChar:
    """Index-level restriction to the submodule ``W``: multiply by the Euler class of ``V/W``."""
    return mul_finite(wedge_conj(V.minus(W)), phi)


def in_langle_RGH(phi: GenChar, h: Subspace) -> Verdict:
    return projected_support_finite(phi, h)


def _conjoin(checks):
    """Three-valued conjunction; the first definite failure wins, else the first unknown."""
    unknown = None
    for label, verdict, ok, bad in checks:
        v = verdict()
        if v.kind == ok:
            continue
        if v.kind == bad:
            return Verdict(PROVED_OUT, witness={"at": label, "verdict": v})
        if unknown is None:
            unknown = Verdict(UNKNOWN, witness={"at": label, "verdict": v}, reason=v.reason)
    return unknown if unknown is not None else Verdict(PROVED_IN)


def _euler_checks(phi, V):
    hmin = minimal_stabilizer(V)
    for h in delta_set(V):
        if h == hmin:
            continue
        _fixed, moving = fixed_submodule(V, h)
        yield h, (lambda m=moving: is_zero(mul_finite(wedge_conj(m), phi))), PROVED_ZERO, PROVED_NONZERO


def in_DM(phi: GenChar, V: GModule) -> Verdict:
    hmin = minimal_stabilizer(V)
    checks = list(_euler_checks(phi, V))
    checks.append((hmin, lambda: projected_support_finite(phi, hmin), PROVED_FINITE, PROVED_INFINITE))
    return _conjoin(checks)


def in_F(phi: GenChar, V: GModule) -> Verdict:
    checks = []
    for h in delta_set(V):
        _fixed, moving = fixed_submodule(V, h)
        checks.append(
            (
                h,
                (lambda m=moving, hh=h: projected_support_finite(mul_finite(wedge_conj(m), phi), hh)),
                PROVED_FINITE,
                PROVED_INFINITE,
            )
        )
    return _conjoin(checks)


def _check_gamma(V, h, gamma):
    _fixed, moving = fixed_submodule(V, h)
    if not h.contains(gamma.integral()) or any(gamma.pair(w) == 0 for w in moving.moving):
        raise GammaNotAdmissible("gamma must lie in h and act bijectively on V/V^h", gamma=str(gamma))
    return moving


def decomposition_map(assignments: dict, V: GModule, gammas: dict | None = None) -> GenChar:
    """``sum_h [wedge conj(V/V^h)]^{-1}_{gamma_h} * Phi_h`` over the stabilizers ``h`` of ``V``."""
    gammas = gammas or {}
    allowed = set(delta_set(V))
    total = GenChar.zero(V.group)
    for h, phi in assignments.items():
        if h not in allowed:
            raise InvariantError("assignment key is not a stabilizer of V", subspace=h.perp_basis)
        gamma = gammas.get(h) or choose_gamma(V, h)
        moving = _check_gamma(V, h, gamma)
        inv = polarized_inverse(moving.conjugate(), gamma)
        total = total + mul_genchar(inv, phi)
    return total


def mother_formula_sides(V: GModule, a: Subspace, h: Subspace, gamma_h: PolarizingVector, phi: GenChar):
    """Both sides of the product identity relating the stabilizers ``a``, ``h`` and ``h + a``."""
    _check_gamma(V, h, gamma_h)
    ha = h + a
    Va, _ = fixed_submodule(V, a)
    Vh, _ = fixed_submodule(V, h)
    Vha, _ = fixed_submodule(V, ha)
    _, V_mod_a = fixed_submodule(V, a)
    _, V_mod_h = fixed_submodule(V, h)
    lhs = mul_finite(wedge_conj(V_mod_a), mul_genchar(polarized_inverse(V_mod_h.conjugate(), gamma_h), phi))
    rhs = mul_finite(
        wedge_conj(Vh.minus(Vha)),
        mul_genchar(polarized_inverse(Va.minus(Vha).conjugate(), gamma_h), phi),
    )
    return lhs, rhs


def mother_formula_check(V, a, h, gamma_h, phi, w: Window) -> Verdict:
    lhs, rhs = mother_formula_sides(V, a, h, gamma_h, phi)
    diff = lhs - rhs
    z = is_zero(diff)
    if z.kind == PROVED_ZERO:
        return z
    if z.kind == PROVED_NONZERO:
        return z
    tr = truncate(diff, w)
    if tr:
        return Verdict(PROVED_NONZERO, witness=tr.support()[0])
    return Verdict(WINDOW_EQUAL, witness=str(w))


def kclass_equal(k1: KClass, k2: KClass, w: Window) -> Verdict:
    """Equality of classes through their indices; window-certified when symbolic zero fails."""
    diff = index_kclass(k1) - index_kclass(k2)
    z = is_zero(diff)
    if z.kind != UNKNOWN:
        return z
    tr = truncate(diff, w)
    return Verdict(PROVED_NONZERO, witness=tr.support()[0]) if tr else Verdict(WINDOW_EQUAL, witness=str(w))
