from core.propagator.wave_group import (
    KleinGordonPropagator,
    MassParameter,
    WaveState,
    cos_multiplier,
    dispersion_relation,
    sin_multiplier,
)

__all__ = [
    "KleinGordonPropagator",
    "MassParameter",
    "WaveState",
    "cos_multiplier",
    "dispersion_relation",
    "sin_multiplier",
]
