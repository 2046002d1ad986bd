"""Numerical laboratory for the limiting key-comparison cost of
QuickSelect / QuickQuant: coupled finite-n simulators, the limit interval
process, closed-form conditional densities, mixture density estimation,
tail envelopes, and finite-n convergence checks."""

__version__ = "1.0.0"

from .rng import UniformStream, DEFAULT_SEED
from .exact import (
    harmonic,
    entropy_h,
    expected_comparisons_exact,
    brute_force_expected_comparisons,
    worst_case_probability,
)
from .process import (
    IntervalPath,
    SelectTrace,
    simulate_interval_process,
    simulate_quickselect,
    simulate_quickval,
    simulate_selection_chain,
    rank_for_quantile,
)
from .conditional import (
    ALPHA,
    BETA,
    AlphaBeta,
    PivotTriple,
    RhoClass,
    rho_class,
    g_density,
    cond_density,
    cond_density_assembled,
    bound_b,
    bound_bt,
    sample_pivot_triple,
)
from .density import (
    DensityGrid,
    EmpiricalSample,
    QuantileFamily,
    estimate_density,
    estimate_cdf,
    dickman_density,
    dickman_cdf,
    build_quantile_family,
    integral_eq_residual_density,
    integral_eq_residual_cdf,
)
from .tails import (
    MgfTable,
    SeriesCoeffs,
    sample_V,
    mgf_v_solve,
    mgf_bound_check,
    chernoff_envelopes,
    tail_envelope,
    left_series_coeff,
    left_series_eval,
    right_derivative,
)
from .convergence import (
    LdReport,
    ks_distance,
    wasserstein1,
    delta_nt,
    ld_interval,
    ld_ratio_check,
    dominance_check,
)
from .report import CheckReport
