"""Polariton dispersion, sum-rule verification, and quantized mode expansions."""

from .materials import (
    FrequencyScale,
    MaterialSpec,
    Resonance,
    SellmeirForm,
    UnitSystem,
    ValidationReport,
    load_material,
    material_from_dict,
    material_to_dict,
    multipolar_to_sellmeir,
    nondimensionalize,
    refractive_index_sq,
    sellmeir_from_wavelength_form,
    sellmeir_to_multipolar,
    validate,
)
from .dispersion import (
    BranchPoint,
    CharPolynomial,
    ForbiddenBand,
    char_polynomial,
    em_group_velocity,
    forbidden_bands,
    group_velocity,
    k_of_omega,
    solve_branches,
    sweep_csv,
    total_group_velocity,
    zero_dispersion_points,
)
from .sumrules import (
    RationalFn,
    SumRuleReport,
    build_f1,
    build_f2,
    build_f3,
    condition_I,
    condition_II,
    condition_V,
    condition_V_display_variant,
    residue_sum_check,
    single_oscillator_oracle,
    sum_rule_report,
)
from .eigensystem import (
    EigenSystem,
    ModeClassification,
    build_1d,
    build_3d,
    classify_modes,
    eigen_diagnostics,
    verify_normalization,
)
from .quantization import (
    GaussianTestFunction,
    KernelSample,
    ModeCoefficients,
    field_expansion_coefficient,
    frequency_domain_rescale,
    kernel_reconstruction,
    mode_coefficients_1d,
    mode_coefficients_3d,
)

__version__ = "0.1.0"
