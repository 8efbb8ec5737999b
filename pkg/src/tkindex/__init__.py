"""Exact index calculus for torus and compact abelian group actions on linear spaces."""

from .charring import FiniteCharacter, wedge, wedge_conj
from .genchar import (
    GenChar,
    PolarizedTerm,
    Verdict,
    Window,
    coefficient_at,
    index_thom,
    induction,
    invert_induction,
    is_zero,
    mul_finite,
    mul_genchar,
    polarized_inverse,
    projected_support_finite,
    sigma_dbar_index,
    truncate,
)
from .ktheory import KClass, decomposition_map, in_DM, in_F, index_kclass, mother_formula_check, restrict_index
from .lattice import (
    CharacterGroup,
    Flag,
    GModule,
    PolarizingVector,
    Subspace,
    Weight,
    choose_gamma,
    delta_set,
    enumerate_flags,
    fixed_submodule,
    quotient_by_character,
)

__version__ = "0.1.0"
