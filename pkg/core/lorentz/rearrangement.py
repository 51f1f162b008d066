"""
Distribution functions and decreasing rearrangements with respect to
hyperbolic volume.

Each grid node is an atom of mass w_i, so the rearrangement of a profile is
a step function whose breakpoints are the cumulative volumes of the nodes
sorted by decreasing |f|.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.errors import PreconditionError, violation
from core.geometry.grid import RadialProfile


@dataclass(frozen=True)
class LorentzExponents:
    """Exponents (p, q) of L^(p,q); math.inf encodes ∞."""
    p: float
    q: float

    def __post_init__(self):
        problems = []
        if not self.p > 1:
            problems.append(violation("p", "1 < p <= inf", self.p, "LORENTZ_EXPONENT"))
        if not 1 <= self.q <= math.inf:
            problems.append(violation("q", "1 <= q <= inf", self.q, "LORENTZ_EXPONENT"))
        if math.isinf(self.p) and not math.isinf(self.q):
            problems.append(violation("q", "p = inf requires q = inf", self.q, "LORENTZ_EXPONENT"))
        if problems:
            raise PreconditionError("invalid Lorentz exponents", problems)

    @property
    def conjugate_p(self) -> float:
        return math.inf if self.p == 1 else (1.0 if math.isinf(self.p) else self.p / (self.p - 1.0))

    def dual(self) -> "LorentzExponents":
        """(p', q) with the same secondary exponent."""
        return LorentzExponents(self.conjugate_p, self.q)

    @property
    def label(self) -> str:
        def fmt(x):
            return "inf" if math.isinf(x) else f"{x:g}"
        return f"({fmt(self.p)},{fmt(self.q)})"


@dataclass(frozen=True, eq=False)
class RearrangementTable:
    levels: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def total_measure(self) -> float:
        return float(self.levels[-1]) if self.levels.size else 0.0

    def evaluate(self, s) -> np.ndarray:
        """f*(s) of the step function; zero beyond the last level."""
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.levels, s, side="right")
        padded = np.append(self.values, 0.0)
        return padded[np.minimum(idx, len(self.values))]

    def distribution(self, height: float) -> float:
        """|{s : f*(s) > height}|."""
        count = int(np.count_nonzero(self.values > height))
        return float(self.levels[count - 1]) if count else 0.0

    def log_levels(self, count: int = 200, floor: float = 1e-6) -> np.ndarray:
        """Logarithmic s-grid over [floor·V_max, V_max] for sampling and reports."""
        top = self.total_measure
        return np.geomspace(floor * top, top, count) if top > 0 else np.zeros(0)

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0.0))


def distribution_function(f: RadialProfile, height: float) -> float:
    """Hyperbolic volume of {|f| > height}."""
    if not height > 0:
        raise PreconditionError("height must be positive", [violation("height", "height > 0", height)])
    mask = np.abs(f.values) > height
    return float(np.sum(f.grid.weights[mask]))


def sort_by_magnitude(values: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-wise (f*, cumulative volume) for a (..., N) array of values.
    """
    magnitude = np.abs(np.asarray(values, dtype=float))
    order = np.argsort(-magnitude, axis=-1, kind="stable")
    sorted_values = np.take_along_axis(magnitude, order, axis=-1)
    levels = np.cumsum(np.asarray(weights)[order], axis=-1)
    return sorted_values, levels


def decreasing_rearrangement(f: RadialProfile) -> RearrangementTable:
    values, levels = sort_by_magnitude(f.values, f.grid.weights)
    return RearrangementTable(levels=levels, values=values)
