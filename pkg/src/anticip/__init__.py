"""Anticipation statistics of orthogonally evolving quantum states.

Library surface: spectral differences and half-step amplitudes (`spectral`),
extremal model states (`models`), closed-form statistics (`closed_form`),
Monte Carlo sampling (`sampling`), measure-level frequency bounds (`bounds`),
and the verification criteria (`verify`).
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    DiscreteMeasure,
    OrthogonalityError,
    abs_moment,
    autocorrelation,
    build_orthogonal_measure,
    check_bounds,
    median_minimizer,
    point_shift_law,
    two_shift_law,
)
from .closed_form import (
    KernelValues,
    LeadingOrder,
    MomentTuple,
    abs_s_squared,
    continuous_expectations,
    continuous_expected_pN,
    continuous_expected_pn,
    continuous_expected_ptot,
    expected_moment_observable,
    expected_pN,
    expected_pn,
    expected_pn_sq,
    expected_ptot,
    kernels,
    lemma_unit_sum,
    var_pN,
    var_pn,
)
from .models import DegenerateModelError, ModelSpec, closed_form_pn, make_model
from .rng import stream
from .sampling import (
    EstimateReport,
    MomentAccumulator,
    MonteCarloConfig,
    NearZeroReport,
    SamplingDistribution,
    merge_accumulators,
    near_zero_statistics,
    parse_distribution,
    run_monte_carlo,
    sample_spectral_difference,
    tail_exceedance,
)
from .spectral import (
    AmplitudeSeries,
    MomentResult,
    ProbabilitySeries,
    ReductionError,
    SpectralDifferenceContinuous,
    SpectralDifferencePeriodic,
    amplitudes_continuous,
    amplitudes_periodic,
    cumulative_probability,
    moment_observable,
    parseval_total,
    probabilities,
    spectral_difference_from_measure,
    tilde_index,
    truncation_window,
)

__all__ = [name for name in dir() if not name.startswith("_")]
