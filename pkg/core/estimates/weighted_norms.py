"""
Mixed time-weighted norms

    ‖u‖_E = sup_{|t|>=t0} e^{(α+h)|t|}‖u(t)‖ + sup_{0<|t|<t0} |t|^{α̃+h}‖u(t)‖

evaluated as discrete sups over time samples, and the data norm obtained by
applying them to the free evolution.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.errors import DiscretizationError
from core.lorentz.norms import lorentz_norms
from core.lorentz.rearrangement import LorentzExponents
from core.params.parameter_set import ParameterSet
from core.propagator.wave_group import KleinGordonPropagator, WaveState
from core.solver.time_grid import TimeGrid

logger = logging.getLogger(__name__)

TAIL = "tail"
CORE = "core"


@dataclass
class WeightedNormReport:
    tail_part: float
    core_part: float
    total: float
    h: float
    d: float
    times: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    complete: bool = True
    linear_gamma: Optional[float] = None

    @property
    def weighted_values(self) -> np.ndarray:
        return self.weights * self.norms

    def rows(self, t0: float) -> List[Dict[str, object]]:
        """One record per sample: (t, norm, weight, weighted_value, branch)."""
        return [
            {"t": t, "norm": v, "weight": w, "weighted_value": w * v, "branch": TAIL if abs(t) >= t0 else CORE}
            for t, v, w in zip(self.times, self.norms, self.weights)
        ]


def time_weights(times: np.ndarray, rate: float, core_exponent: float, t0: float) -> np.ndarray:
    """e^{rate|t|} on |t| >= t0, |t|^{core_exponent} inside."""
    s = np.abs(np.asarray(times, dtype=float))
    if np.any(s == 0.0):
        raise DiscretizationError("t = 0 is a limit node and carries no weight")
    return np.where(s >= t0, np.exp(rate * s), s ** core_exponent)


def weighted_sup(times: np.ndarray, norms: np.ndarray, alpha: float, alpha_tilde: float, t0: float,
                 h: float = 0.0) -> float:
    """Total of the two branch sups; used inside the Picard loop."""
    s = np.abs(np.asarray(times, dtype=float))
    weighted = time_weights(s, alpha + h, alpha_tilde + h, t0) * norms
    tail = s >= t0
    tail_part = float(np.max(weighted[tail], initial=0.0))
    core_part = float(np.max(weighted[~tail], initial=0.0))
    return tail_part + core_part


def weighted_norm(times: Sequence[float], norms: Sequence[float], ps: ParameterSet, h: Optional[float] = None,
                  d: Optional[float] = None) -> WeightedNormReport:
    """
    Discrete E^d_{α+h, α̃+h} norm of time-indexed (b+1, d) norm samples.

    Samples must exclude t = 0. A trace that stops before t0 has no tail
    branch; the report is then flagged incomplete.
    """
    h = ps.h if h is None else h
    d = ps.d if d is None else d
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.shape != norms.shape:
        raise DiscretizationError("times and norms must have the same shape")
    if np.any(norms < 0) or not np.all(np.isfinite(norms)):
        raise DiscretizationError("norm samples must be finite and nonnegative")
    weights = time_weights(times, ps.alpha + h, ps.alpha_tilde + h, ps.t0)
    weighted = weights * norms
    tail = np.abs(times) >= ps.t0
    complete = bool(np.any(tail))
    if not complete:
        logger.warning("time samples stop before t0=%g; tail part of the weighted norm is undefined", ps.t0)
    tail_part = float(np.max(weighted[tail], initial=0.0))
    core_part = float(np.max(weighted[~tail], initial=0.0))
    return WeightedNormReport(
        tail_part=tail_part, core_part=core_part, total=tail_part + core_part, h=h, d=d,
        times=times, norms=norms, weights=weights, complete=complete,
    )


def linear_flow_norms(data: WaveState, propagator: KleinGordonPropagator, times: np.ndarray,
                      e: LorentzExponents) -> np.ndarray:
    """‖Ẇ(t)u0 + W(t)u1‖_{(p,q)} at every sample time."""
    transform = propagator.transform
    u0 = transform.forward(data.u).values
    u1 = transform.forward(data.ut).values
    u_hat, _ = propagator.flow_spectral(np.asarray(times, dtype=float), u0, u1)
    return lorentz_norms(transform.inverse_values(u_hat), transform.radial.weights, e)


def data_norm_report(data: WaveState, ps: ParameterSet, propagator: KleinGordonPropagator, time_grid: TimeGrid,
                     d: Optional[float] = None, h: Optional[float] = None, two_sided: bool = True) -> WeightedNormReport:
    """Γ^d_{1,h}: the weighted norm of the free evolution of the data."""
    h = ps.h if h is None else h
    d = ps.d if d is None else d
    e = LorentzExponents(ps.p, d)
    times = time_grid.evaluation_nodes
    norms = linear_flow_norms(data, propagator, times, e)
    if two_sided:
        norms = np.maximum(norms, linear_flow_norms(data, propagator, -times, e))
    report = weighted_norm(times, norms, ps, h=h, d=d)
    report.linear_gamma = report.total
    return report


def data_norm(data: WaveState, ps: ParameterSet, propagator: KleinGordonPropagator, time_grid: TimeGrid,
              d: Optional[float] = None, h: Optional[float] = None, two_sided: bool = True) -> float:
    return data_norm_report(data, ps, propagator, time_grid, d=d, h=h, two_sided=two_sided).total

