"""Semiclassical transfer matrices across finite-order crossings of
characteristic curves for 2x2 systems.

The package computes, for a small parameter h, how incoming WKB
coefficients map to outgoing ones across a point where two characteristic
curves meet with finite contact order m: closed-form predictions with the
h^{1/(m+1)} off-diagonal scaling, numerical extraction from solved ODE
systems, h sweeps with power-law fits, and a batch CLI.
"""

from ._kernels import BACKEND
from .errors import (
    BudgetExceeded,
    CaseMismatch,
    CrossingKitError,
    DegenerateFit,
    DegenerateS,
    GridTooCoarse,
    IllConditioned,
    NoFiniteContact,
    NotContractive,
    NumericalError,
    SchemaError,
    StepFailure,
    TransversalUnsupported,
    TurningPointInRange,
    ValidationError,
    WindowInsideSupport,
    ZeroGradient,
)
from .grids import GridFunction, grid_for
from .normalform import (
    NormalFormProblem,
    model_corpus,
    model_omega,
    neumann_solve,
    ode_oracle,
    predict_transfer,
    transfer_numeric,
)
from .oscquad import (
    AmplitudeSpec,
    OscResult,
    PhaseSpec,
    gamma_real,
    gaussian_pairing,
    mu_m,
    osc_integral_numeric,
    osc_leading_term,
    stationary_prefactor,
)
from .profiles import ZERO_BUMP, Bump, Poly1
from .schrodinger import (
    SchrodingerProblem,
    WkbBasis,
    branch_decompose,
    build_crossing_data,
    numeric_transfer_case_i,
    predict_transfer_case_i,
    predict_transfer_case_ii,
    schrodinger_corpus,
    solve_schrodinger_ode,
)
from .sweep import (
    PowerLawFit,
    SweepReport,
    SweepRow,
    Verdict,
    attach_fits,
    check_exponent,
    check_prefactor,
    fit_power_law,
    read_csv,
    run_sweep,
    write_csv,
)
from .symbolcalc import (
    CrossingData,
    Omega12,
    Poly2,
    contact_order,
    crossing_data_from_symbols,
    iterated_bracket,
    normal_form_constants,
    omega_general,
    poisson_bracket,
    sign_s,
    theta_of,
    transfer_predicted_general,
)
from .transfer import TransferMatrix

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSpec",
    "BACKEND",
    "BudgetExceeded",
    "Bump",
    "CaseMismatch",
    "CrossingData",
    "CrossingKitError",
    "DegenerateFit",
    "DegenerateS",
    "GridFunction",
    "GridTooCoarse",
    "IllConditioned",
    "NoFiniteContact",
    "NormalFormProblem",
    "NotContractive",
    "NumericalError",
    "Omega12",
    "OscResult",
    "PhaseSpec",
    "Poly1",
    "Poly2",
    "PowerLawFit",
    "SchemaError",
    "SchrodingerProblem",
    "StepFailure",
    "SweepReport",
    "SweepRow",
    "TransferMatrix",
    "TransversalUnsupported",
    "TurningPointInRange",
    "ValidationError",
    "Verdict",
    "WindowInsideSupport",
    "WkbBasis",
    "ZERO_BUMP",
    "ZeroGradient",
    "attach_fits",
    "branch_decompose",
    "build_crossing_data",
    "check_exponent",
    "check_prefactor",
    "contact_order",
    "crossing_data_from_symbols",
    "fit_power_law",
    "gamma_real",
    "gaussian_pairing",
    "grid_for",
    "iterated_bracket",
    "model_corpus",
    "model_omega",
    "mu_m",
    "neumann_solve",
    "normal_form_constants",
    "numeric_transfer_case_i",
    "ode_oracle",
    "omega_general",
    "osc_integral_numeric",
    "osc_leading_term",
    "poisson_bracket",
    "predict_transfer",
    "predict_transfer_case_i",
    "predict_transfer_case_ii",
    "read_csv",
    "run_sweep",
    "schrodinger_corpus",
    "sign_s",
    "solve_schrodinger_ode",
    "stationary_prefactor",
    "theta_of",
    "transfer_numeric",
    "transfer_predicted_general",
    "write_csv",
]
