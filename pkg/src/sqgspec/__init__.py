"""Truncated-Galerkin spectral runs for a transport equation on the 2-torus,
with numerically certified diagnostics of a mode-shifting growth mechanism."""

from .diagnostics import (
    CaseThresholds,
    DiagnosticsRecord,
    InterpolationReport,
    MarginError,
    Sigma_rewritten,
    classify_case,
    combined_invariant,
    h_half_sum,
    hm12_sum,
    interpolation_checks,
    j_functional,
    l2_sum,
    low_mass_sum,
    make_record,
    shear_field,
    shear_rate,
    sigma_and_Sigma,
    sigma_bound_check,
    sobolev_sum,
    tail_mass,
    w_k2_sum,
    w_phi_sum,
)
from .lattice import (
    NonFiniteError,
    Params,
    SEED_MODE,
    SHEAR_MODE,
    SpectralState,
    full_field,
    half_lattice_contains,
    initial_data,
    kernel_weight,
    make_random_state,
    state_from_modes,
    wedge,
)
from .quadform import (
    CertificateReport,
    FormCoefficients,
    domination_constant,
    form_coefficients,
    min_eigenvalue,
    sigma_lower_bound_certificate,
)
from .tendency import CalibrationError, rhs_direct, rhs_fast, triad_conservation_check
from .timeloop import (
    BlowupError,
    DriftError,
    ListSink,
    RunStats,
    Sink,
    StepControl,
    run,
    step_rk4,
)

__version__ = "0.1.0"
