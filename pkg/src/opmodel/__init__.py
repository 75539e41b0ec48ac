"""Operator models for C.0 contractions on truncated analytic Hilbert spaces."""
from .errors import (
    DimensionMismatch,
    EmptyGenerators,
    InvalidAlpha,
    NotC0,
    NotContraction,
    NotHermitian,
    NotInvariant,
    NotOrthonormal,
    NotPSD,
    NotSquare,
    OpModelError,
    ParseError,
    PointOutsideDisc,
    TruncationOverflow,
)
from .invariant import (
    Subspace,
    check_invariant,
    compress,
    invariant_factorization,
    span_closure_invariant,
    verify_factorization,
)
from .model import BlockColumnMap, apply_L, defect_operator, model_coisometry, telescoping_check
from .multiplier import (
    Multiplier,
    adjoint_kernel_identity_check,
    extract_multiplier,
    multiplier_apply,
    multiplier_eval,
    verify_multiplier,
)
from .numerics import ToleranceConfig, is_partial_isometry, orthonormal_range, projection_from_basis, psd_sqrt
from .spaces import (
    KernelSpec,
    TruncatedSpace,
    classify_contraction,
    gram_psd_check,
    kernel_coefficients,
    kernel_eval,
    shift_matrix,
)
from .wandering import wandering_span_check, wandering_subspace

__version__ = "0.1.0"
