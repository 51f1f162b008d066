from core.lorentz.rearrangement import (
    LorentzExponents,
    RearrangementTable,
    decreasing_rearrangement,
    distribution_function,
)
from core.lorentz.norms import lorentz_norm, lorentz_norms, weak_norm_by_heights
from core.lorentz.checks import CheckReport, InclusionReport, holder_check, inclusion_check

__all__ = [
    "CheckReport",
    "InclusionReport",
    "LorentzExponents",
    "RearrangementTable",
    "decreasing_rearrangement",
    "distribution_function",
    "holder_check",
    "inclusion_check",
    "lorentz_norm",
    "lorentz_norms",
    "weak_norm_by_heights",
]
