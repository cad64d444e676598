"""Exact toolkit for fat (non-singular) 2-step nilpotent Lie algebras."""

from .dersolve import (
    DerivationSpace,
    DimensionReport,
    GradedDerivation,
    analyze,
    g0_basis,
    graded_derivations,
    HatInclusion,
    hat_inclusion_check,
    orthogonal_derivations,
    so2_witness,
    single_block_g0_basis,
    theorem33_basis,
    verify_reflection_automorphism,
)
from .liealg import (
    FatnessReport,
    FatStatus,
    StepTwoAlgebra,
    bracket,
    is_fat,
    is_htype_standard_metric,
    pfaffian_pencil,
    t_matrix,
    validate,
)
from .normform import (
    ComplexParam,
    IsoReport,
    MoebiusMap,
    NormalFormSpec,
    build_algebra,
    build_hat,
    canonical_form,
    delta_invariant,
    extract_invariants,
    is_htype_spec,
    is_isomorphic,
    moebius_apply,
    parse_spec,
)

__all__ = [
    "DerivationSpace",
    "DimensionReport",
    "GradedDerivation",
    "analyze",
    "g0_basis",
    "graded_derivations",
    "HatInclusion",
    "hat_inclusion_check",
    "orthogonal_derivations",
    "so2_witness",
    "single_block_g0_basis",
    "theorem33_basis",
    "verify_reflection_automorphism",
    "FatnessReport",
    "FatStatus",
    "StepTwoAlgebra",
    "bracket",
    "is_fat",
    "is_htype_standard_metric",
    "pfaffian_pencil",
    "t_matrix",
    "validate",
    "ComplexParam",
    "IsoReport",
    "MoebiusMap",
    "NormalFormSpec",
    "build_algebra",
    "build_hat",
    "canonical_form",
    "delta_invariant",
    "extract_invariants",
    "is_htype_spec",
    "is_isomorphic",
    "moebius_apply",
    "parse_spec",
]

__version__ = "0.1.0"
