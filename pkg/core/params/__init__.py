from core.params.envelope import (
    EnvelopeFit,
    beta_identity_constant,
    beta_identity_quadrature,
    beta_p,
    envelope_bound,
    find_t0,
    phi_p,
)
from core.params.parameter_set import (
    AdmissibleInterval,
    ParameterSet,
    admissible_range,
    derive,
    effective_range,
    local_upper_bound,
    sample_admissible,
    sharp_lower_bound,
)

__all__ = [
    "AdmissibleInterval",
    "EnvelopeFit",
    "ParameterSet",
    "admissible_range",
    "beta_identity_constant",
    "beta_identity_quadrature",
    "beta_p",
    "derive",
    "effective_range",
    "envelope_bound",
    "find_t0",
    "local_upper_bound",
    "phi_p",
    "sample_admissible",
    "sharp_lower_bound",
]
