"""Loophole-free QKD post-processing: rates, thresholds, detection Monte Carlo."""

from .numerics import NoSignChangeError, binary_entropy, find_root_bisect
from .rates import (
    CoherentDecoy,
    CoherentDecoyMemory,
    DegenerateInputError,
    DetectionStats,
    KeyRateBreakdown,
    RANDOM_ASSIGNMENT_ERROR_RATE,
    SinglePhoton,
    SourceModel,
    SystemParams,
    coherent_memory_stats,
    coherent_stats,
    key_rate,
    key_rate_coherent,
    key_rate_single_click,
    phase_error_single_bound,
    qber,
    rate_basis_independent_baseline,
    single_photon_stats,
)
from .simulate import (
    AdversaryStrategy,
    Basis,
    ClickKind,
    ClickOutcome,
    ComparisonReport,
    ExtremeTimeShift,
    StrongPulse,
    TrialBatch,
    TrialRecord,
    apply_extreme_time_shift,
    apply_strong_pulse,
    compare_to_analytic,
    empirical_stats,
    run_trials,
    trial_records,
)
from .threshold import (
    EmptyCurveError,
    GridSpec,
    MODEL_FAMILIES,
    ThresholdCurve,
    ThresholdPoint,
    curve_to_csv,
    rate_at,
    solve_threshold_ed,
    sweep_curve,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryStrategy",
    "Basis",
    "ClickKind",
    "ClickOutcome",
    "CoherentDecoy",
    "CoherentDecoyMemory",
    "ComparisonReport",
    "DegenerateInputError",
    "DetectionStats",
    "EmptyCurveError",
    "ExtremeTimeShift",
    "GridSpec",
    "KeyRateBreakdown",
    "MODEL_FAMILIES",
    "NoSignChangeError",
    "RANDOM_ASSIGNMENT_ERROR_RATE",
    "SinglePhoton",
    "SourceModel",
    "StrongPulse",
    "SystemParams",
    "ThresholdCurve",
    "ThresholdPoint",
    "TrialBatch",
    "TrialRecord",
    "apply_extreme_time_shift",
    "apply_strong_pulse",
    "binary_entropy",
    "coherent_memory_stats",
    "coherent_stats",
    "compare_to_analytic",
    "curve_to_csv",
    "empirical_stats",
    "find_root_bisect",
    "key_rate",
    "key_rate_coherent",
    "key_rate_single_click",
    "phase_error_single_bound",
    "qber",
    "rate_at",
    "rate_basis_independent_baseline",
    "run_trials",
    "single_photon_stats",
    "solve_threshold_ed",
    "sweep_curve",
    "trial_records",
]
