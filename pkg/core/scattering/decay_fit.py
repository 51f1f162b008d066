"""Log-linear decay fits of defect and stability traces."""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import PreconditionError, violation
from core.params.parameter_set import ParameterSet

MIN_SAMPLES = 5
SLOPE_SLACK = 0.05
NUMERICAL_FLOOR = 1e-300


@dataclass
class DecayFit:
    t1: float
    t2: float
    slope: float
    intercept: float
    residual: float
    target: float
    samples: int
    floor_reached: bool = False

    @property
    def passed(self) -> bool:
        """Slope at least as steep as the target, up to the slack; a floor hit passes."""
        if self.floor_reached:
            return True
        return self.slope <= self.target + SLOPE_SLACK

    def to_dict(self):
        return {
            "t1": self.t1, "t2": self.t2, "slope": self.slope, "intercept": self.intercept,
            "residual": self.residual, "target": self.target, "samples": self.samples,
            "floor_reached": self.floor_reached, "passed": self.passed,
        }


def default_window(ps: ParameterSet, t_max: float) -> Tuple[float, float]:
    return ps.t0 + 2.0, t_max - 1.0


def _log_linear(times: np.ndarray, values: np.ndarray) -> Tuple[float, float, float]:
    (slope, intercept), residuals, *_ = np.polyfit(times, np.log(values), 1, full=True)
    residual = float(residuals[0]) if residuals.size else 0.0
    return float(slope), float(intercept), residual


def decay_rate_fit(times: Sequence[float], defects: Sequence[float], target: float,
                   window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Least-squares slope of log(defect) against t over the window."""
    times = np.asarray(times, dtype=float)
    defects = np.asarray(defects, dtype=float)
    t1, t2 = window if window is not None else (float(times[0]), float(times[-1]))
    if not t2 > t1:
        raise PreconditionError("empty fit window", [violation("window", "t2 > t1", (t1, t2))])
    mask = (times >= t1) & (times <= t2)
    count = int(np.count_nonzero(mask))
    if count < MIN_SAMPLES:
        raise PreconditionError(
            "too few samples in the fit window",
            [violation("window", f">= {MIN_SAMPLES} samples", count)],
        )
    t, v = times[mask], defects[mask]
    if np.any(v <= NUMERICAL_FLOOR):
        return DecayFit(t1, t2, math.nan, math.nan, math.nan, target, count, floor_reached=True)
    slope, intercept, residual = _log_linear(t, v)
    return DecayFit(t1, t2, slope, intercept, residual, target, count)


def scattering_target(ps: ParameterSet, h: float = 0.0) -> float:
    """-(bα + h)."""
    return -(ps.b_alpha + h)


def is_decreasing(times: Sequence[float], values: Sequence[float]) -> bool:
    """Negative log-linear trend and a last value below the first; an all-zero trace counts."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.all(values <= NUMERICAL_FLOOR):
        return True
    if values[-1] >= values[0]:
        return False
    positive = values > NUMERICAL_FLOOR
    if np.count_nonzero(positive) < 2:
        return True
    slope, _, _ = _log_linear(times[positive], values[positive])
    return slope < 0.0


def little_o_trend(times: Sequence[float], defects: Sequence[float], rate: float,
                   window: Tuple[float, float]) -> bool:
    """e^{rate·t}·defect decreasing over the window."""
    times = np.asarray(times, dtype=float)
    mask = (times >= window[0]) & (times <= window[1])
    weighted = np.exp(rate * times[mask]) * np.asarray(defects, dtype=float)[mask]
    return is_decreasing(times[mask], weighted)
