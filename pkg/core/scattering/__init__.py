from core.scattering.asymptotics import (
    AsymptoticData,
    CONSISTENCY_TOLERANCE,
    DefectTrace,
    asymptotic_data,
    defect_trace,
    polish,
    scattering_defect,
    truncation_bound,
)
from core.scattering.decay_fit import (
    DecayFit,
    decay_rate_fit,
    default_window,
    is_decreasing,
    little_o_trend,
    scattering_target,
)
from core.scattering.stability import StabilityReport, compare_trajectories, quasi_triangle_constant, stability_experiment

__all__ = [
    "AsymptoticData",
    "CONSISTENCY_TOLERANCE",
    "DecayFit",
    "DefectTrace",
    "StabilityReport",
    "asymptotic_data",
    "compare_trajectories",
    "decay_rate_fit",
    "default_window",
    "defect_trace",
    "is_decreasing",
    "little_o_trend",
    "polish",
    "quasi_triangle_constant",
    "scattering_defect",
    "scattering_target",
    "stability_experiment",
    "truncation_bound",
]
