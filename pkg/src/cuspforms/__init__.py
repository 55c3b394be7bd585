"""Exact construction and verification of cusp forms on gl_n(Q_p) and GL_n(Q_p)."""

from .cyclotomic import Cyclotomic, additive_character
from .errors import (
    ConvergenceViolation,
    CuspViolation,
    DomainViolation,
    InsufficientPrecision,
    PrecisionError,
    ReductionMismatch,
)
from .gln import (
    EllipticBump,
    ParabolicData,
    companion_elliptic,
    conjugate_function,
    default_torus_poly,
    ellipticity_certificate,
    elliptic_bump,
    standard_parabolics,
)
from .group import (
    GroupFunction,
    bch_defect_check,
    group_cusp_verify,
    jacquet_vanishing_check,
    lambda_threshold,
    lift_to_group,
)
from .lattice import (
    LatticeWindow,
    SchwartzFunction,
    fourier_separable,
    fourier_transform,
    integrate_affine_slice,
    lie_cusp_verify,
    parabolic_descent_identity,
    scale_function,
)
from .padic import (
    ResiduePolynomial,
    ScaledMatrix,
    ScaledResidue,
    charpoly_division_free,
    exp_truncated,
    irreducible_over_residue_field,
    lattice_valuation,
    log_truncated,
)
from .pipeline import PipelineConfig, PipelineReport, emit_report, run_pipeline

__version__ = "0.1.0"
