"""Pseudospectral low-regularity integrator for the cubic nonlinear
Schroedinger equation on the torus, with an independent direct-sum oracle
and a convergence-study harness."""

from .errors import (
    AliasingError,
    ConfigurationError,
    DegenerateReportError,
    InvalidGridError,
    NotInSpaceError,
    OracleCostError,
)
from .fields import (
    PhysicalSamples,
    SpectralField,
    conjugate,
    constant_field,
    dealiased_product,
    forward_interp,
    free_flow,
    from_json,
    from_triples,
    inv_derivative,
    inverse_eval,
    norm_hs,
    norm_l2,
    norm_l2_grid,
    padded_transform_length,
    project_high,
    project_low,
    to_json,
    to_triples,
    zero_mode,
)
from .harness import (
    ConvergenceReport,
    ExperimentConfig,
    OracleCheckResult,
    SweepRow,
    eoc,
    error_l2,
    flag_saturated,
    median_step_ms,
    oracle_check,
    report_to_dict,
    spatial_sweep,
    temporal_sweep,
    write_csv,
    write_json,
)
from .initial import (
    PlaneWaveSolution,
    RegularityParams,
    plane_wave_at,
    project_initial,
    random_low_reg,
)
from .scheme import (
    ORACLE_MODE_LIMIT,
    SchemeParams,
    StepObservation,
    StepObserver,
    evolve,
    evolve_twisted,
    step_direct_oracle,
    step_lie_splitting,
    step_twisted,
    step_untwisted,
    twisted_terms,
    untwisted_terms,
)

__version__ = "0.1.0"
