"""Strong-stability-preserving Runge-Kutta and IMEX methods.

Representation of Runge-Kutta and additive implicit-explicit tableaux,
order-condition generation and verification with separate linear and
nonlinear orders, radius-of-absolute-monotonicity certificates, linear
stability metrics, coefficient optimization, fixed-step integrators, and
the accompanying test-problem and experiment harnesses.
"""

from .tableau import (
    ButcherTableau,
    ImexTableau,
    ShuOsherForm,
    TableauError,
    butcher_to_canonical_shu_osher,
    shu_osher_ssp_coefficient,
    shu_osher_to_butcher,
)
from .methodfile import MethodFileError, load_method, save_method
from .order_conditions import (
    ConditionError,
    ConditionSet,
    ResidualReport,
    evaluate,
    imex_linear_conditions,
    imex_nonlinear_conditions,
    rk_linear_conditions,
    rk_nonlinear_conditions,
)
from .ssp import (
    ImexSspQuery,
    SspCertificate,
    imex_is_feasible,
    imex_ssp_radius,
    is_absolutely_monotonic,
    ssp_radius,
)
from .stability import (
    StabilityGrid,
    StabilityQuery,
    construct_shu_osher_pair_family,
    imaginary_axis_extent,
    is_a_stable_sampled,
    real_axis_crossing,
    region_boundary,
    stability_function,
)
from .integrators import (
    OdePart,
    OdeSystem,
    ReferenceVerificationError,
    StepError,
    Trajectory,
    integrate,
    reference_solution,
    step_imex,
    step_rk,
    step_shu_osher,
)
from .problems import (
    Grid1D,
    Problem,
    SplitSemidiscretization,
    buckley_leverett,
    burgers,
    max_tv_rise,
    problem_catalog,
    spectral_derivative_matrix,
    split_problems,
    total_variation,
    upwind_advection,
    van_der_pol,
)
from .catalog import bundled_method_names, load_bundled

__version__ = "0.1.0"
