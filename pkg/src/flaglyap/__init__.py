"""Vector-valued Lyapunov spectra of matrix cocycles over finite bases.

The package computes Iwasawa and polar factorizations, the induced
dynamics on (partial) flag manifolds, attractor and repeller Morse
sections, exact periodic Lyapunov spectra, and the closed-form
derivative of designated spectrum combinations under gauge
perturbations, validated against finite differences.
"""

from .basedyn import BaseSystem, Cocycle, cocycle_step, cycle_decomposition, perturb
from .errors import (
    AsymmetricInput,
    DecompositionFailure,
    DegenerateSpectrum,
    DeterminantError,
    FlaglyapError,
    MalformedPermutation,
    NoConvergence,
    NotSymplectic,
    PredictionViolated,
    SamplerExhausted,
    SingularInput,
    TypeMismatch,
    UnsortedInput,
    ValidationError,
    WeightNotAdmissible,
)
from .flagdyn import (
    FlagPoint,
    Section,
    act,
    attractor_section,
    cocycle_a,
    cocycle_omega,
    flag_distance,
    repeller_section,
    standard_flag,
    transversality_check,
)
from .gaugediff import (
    GaugeDirection,
    analytic_differential,
    finite_difference,
    gauge_exp,
    perturbed_spectrum,
    random_gauge_direction,
    ruelle_differential,
    smoothness_scan,
    zero_direction,
)
from .liealg import (
    ThetaSet,
    WeightVector,
    a_projection,
    ad_action,
    fundamental_weight,
    simple_root_value,
    theta_of,
    weight_combination,
    weights_outside,
    weyl_apply,
)
from .matkit import (
    IwasawaFactors,
    PolarFactors,
    eig_log_moduli,
    is_positive_definite,
    iwasawa,
    mat_exp,
    minor,
    polar_chamber,
)
from .semigrp import (
    ConePositive,
    MinorPositive,
    SemigroupSpec,
    SymplecticQ,
    TotallyPositive,
    interior_membership,
    is_sign_regular_interior,
    predicted_theta,
    sample_interior,
    sample_interior_cocycle,
    verify_gap_predictions,
)
from .spectra import (
    SpectrumReport,
    flag_type_estimate,
    lyapunov_of_flag,
    polar_exponent_exact,
    polar_exponent_finite,
    spectrum_functional,
    spectrum_report,
    spectrum_via_section,
    weyl_relation_check,
)
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
