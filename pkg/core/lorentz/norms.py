"""
Lorentz quasi-norms from the decreasing rearrangement.

    q < ∞:  (∫ (s^{1/p} f*(s))^q ds/s)^{1/q}
    q = ∞:  sup_s s^{1/p} f*(s)

For the step rearrangement of a grid profile both are evaluated exactly:
∫_{s_{k-1}}^{s_k} s^{q/p-1} ds = (p/q)(s_k^{q/p} - s_{k-1}^{q/p}).
"""
import logging
import math
from typing import Union

import numpy as np

from core.errors import DivergentNormError
from core.geometry.grid import RadialProfile
from core.lorentz.rearrangement import LorentzExponents, decreasing_rearrangement, sort_by_magnitude

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-6
TAIL_FRACTION = 0.1

__all__ = [
    "lorentz_norm",
    "lorentz_norms",
    "norm_from_rearrangement",
    "tail_decayed",
    "weak_norm_by_heights",
]


def norm_from_rearrangement(values: np.ndarray, levels: np.ndarray, e: LorentzExponents) -> np.ndarray:
    """Row-wise norm of sorted (…, N) values with cumulative volumes."""
    values = np.asarray(values, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if values.shape[-1] == 0:
        return np.zeros(values.shape[:-1])
    if math.isinf(e.p):
        return values[..., 0]
    if math.isinf(e.q):
        return np.max(levels ** (1.0 / e.p) * values, axis=-1)
    power = e.q / e.p
    grown = levels ** power
    previous = np.concatenate([np.zeros(grown.shape[:-1] + (1,)), grown[..., :-1]], axis=-1)
    total = np.sum(values ** e.q * (grown - previous), axis=-1) * (e.p / e.q)
    return total ** (1.0 / e.q)


def lorentz_norms(values: np.ndarray, weights: np.ndarray, e: LorentzExponents) -> np.ndarray:
    """‖·‖_{(p,q)} of every row of a (M, N_r) array of profile values."""
    sorted_values, levels = sort_by_magnitude(values, weights)
    return norm_from_rearrangement(sorted_values, levels, e)


def tail_decayed(f: RadialProfile, tol: float = TAIL_TOLERANCE) -> bool:
    """True when |f| on the outer tenth of the grid is negligible."""
    peak = f.sup_norm()
    if peak == 0.0:
        return True
    outer = f.grid.nodes > (1.0 - TAIL_FRACTION) * f.grid.r_max
    return float(np.max(np.abs(f.values[outer]), initial=0.0)) <= tol * peak


def lorentz_norm(f: Union[RadialProfile, np.ndarray], e: LorentzExponents, check_tail: bool = False,
                 weights: np.ndarray = None) -> float:
    """
    Lorentz (p,q) norm of a radial profile.

    With check_tail the profile must decay before r_max; otherwise the grid
    truncation would hide a divergent tail and DivergentNormError is raised.
    """
    if isinstance(f, RadialProfile):
        if check_tail and not tail_decayed(f):
            raise DivergentNormError(
                f"profile does not decay before r_max={f.grid.r_max}; {e.label} norm would be truncated"
            )
        table = decreasing_rearrangement(f)
        return float(norm_from_rearrangement(table.values, table.levels, e))
    return float(lorentz_norms(np.asarray(f)[None, :], weights, e)[0])


def weak_norm_by_heights(f: RadialProfile, p: float) -> float:
    """sup_h h·λ_f(h)^{1/p}, evaluated just below every value level."""
    table = decreasing_rearrangement(f)
    values = table.values
    positive = values[values > 0]
    if positive.size == 0:
        return 0.0
    heights = positive * (1.0 - 1e-12)
    ascending = values[::-1]
    counts = len(values) - np.searchsorted(ascending, heights, side="right")
    measures = table.levels[counts - 1]
    return float(np.max(heights * measures ** (1.0 / p)))
