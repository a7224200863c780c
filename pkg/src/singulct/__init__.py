"""Singularity invariants of hypersurfaces and p-adic exponential sums."""

__version__ = "0.1.0"

from .exact import (  # noqa: E402
    INF,
    MonomialIdeal,
    ParseError,
    Polynomial,
    WeightVector,
    eval_mod,
    ord_w,
    parse_polynomial,
    partial_derivative,
)
from .invariants import (  # noqa: E402
    BFunctionRoots,
    FamilyDescriptor,
    IdealPresentation,
    InvariantBundle,
    classify_rational_singularities,
    family_bundle,
    jacobian_ideal,
    lct_determinantal_pair,
    lct_diagonal_pair,
    lct_from_min_exp,
    lct_monomial,
    milnor_number,
    min_exp_family,
    min_exp_from_bfunction,
    orbit_codimension,
    orbit_contact_order,
    pair_ideal,
    raw_min_diagonal,
)
from .expsum import (  # noqa: E402
    PrimePowerModulus,
    SubschemeSpec,
    decay_profile,
    exp_sum,
    localization_check,
    point_count,
    residue_histogram,
)
