"""Sparse, reconstructing time-frequency analysis with an explicit
chirp-factor track, computed by convex optimization, plus STFT and
synchrosqueezed-STFT baselines and an optimal-transport evaluation harness."""

from .baselines import WindowSpec, gaussian_stft, synchrosqueezed_stft
from .metrics import (
    DMetricReport,
    TvPS,
    compress_dynamic_range,
    d_metric,
    d_metric_profile,
    ideal_tvps,
    ot1d,
    tvps_from_tfr,
)
from .operators import (
    FunctionalTerms,
    frequency_derivative,
    functional_terms,
    reconstruct,
    reconstruct_adjoint,
    smooth_gradient,
    time_derivative,
    transport_residual,
    transport_residual_adjoint,
)
from .solver import (
    OuterRecord,
    SolverError,
    SolveTrace,
    TycoonResult,
    estimate_lipschitz,
    fista,
    power_iteration,
    prox_l1,
    select_stage_discrepancy,
    solve,
    update_chirp,
)
from .synth import (
    GIMTComponent,
    ModelParams,
    add_noise,
    fast_component_amp,
    fast_if_track,
    gaussian_kernel,
    make_two_component_benchmark,
    noise_std_for_snr,
    phase_from_if,
    slow_component_amp,
    slow_component_phase,
    smoothed_brownian,
    synth_gimt,
    validate_gimt,
)
from .types import (
    ChirpTrack,
    SampledSignal,
    TFGrid,
    TFMatrix,
    TycoonParams,
    default_params,
    make_grid,
)

__version__ = "0.1.0"

__all__ = [
    "ChirpTrack",
    "DMetricReport",
    "FunctionalTerms",
    "GIMTComponent",
    "ModelParams",
    "OuterRecord",
    "SampledSignal",
    "SolveTrace",
    "SolverError",
    "TFGrid",
    "TFMatrix",
    "TvPS",
    "TycoonParams",
    "TycoonResult",
    "WindowSpec",
    "add_noise",
    "compress_dynamic_range",
    "d_metric",
    "d_metric_profile",
    "default_params",
    "estimate_lipschitz",
    "fast_component_amp",
    "fast_if_track",
    "fista",
    "frequency_derivative",
    "functional_terms",
    "gaussian_kernel",
    "gaussian_stft",
    "ideal_tvps",
    "make_grid",
    "make_two_component_benchmark",
    "noise_std_for_snr",
    "ot1d",
    "phase_from_if",
    "power_iteration",
    "prox_l1",
    "reconstruct",
    "reconstruct_adjoint",
    "select_stage_discrepancy",
    "slow_component_amp",
    "slow_component_phase",
    "smooth_gradient",
    "smoothed_brownian",
    "solve",
    "synchrosqueezed_stft",
    "synth_gimt",
    "time_derivative",
    "transport_residual",
    "transport_residual_adjoint",
    "tvps_from_tfr",
    "update_chirp",
    "validate_gimt",
]
