from core.estimates.dispersive import (
    DispersiveReport,
    REFINEMENT_TOLERANCE,
    dispersive_ratio,
    envelope_dominates,
    refinement_change,
)
from core.estimates.weighted_norms import (
    WeightedNormReport,
    data_norm,
    data_norm_report,
    linear_flow_norms,
    time_weights,
    weighted_norm,
    weighted_sup,
)

__all__ = [
    "DispersiveReport",
    "REFINEMENT_TOLERANCE",
    "WeightedNormReport",
    "data_norm",
    "data_norm_report",
    "dispersive_ratio",
    "envelope_dominates",
    "linear_flow_norms",
    "refinement_change",
    "time_weights",
    "weighted_norm",
    "weighted_sup",
]
