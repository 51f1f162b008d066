"""
Time grids for the Duhamel convolution.

Node 0 is the initial time; it enters the quadrature as the left end of the
first panel but is never an evaluation node of the weighted norms. The core
region (0, t0) is graded geometrically from t_min so that the |t|^{-α̃} core
behaviour is resolved; [t0, t_max] is uniform.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from core.errors import DiscretizationError, InterpolationRequiredError


@dataclass(frozen=True, eq=False)
class TimeGrid:
    nodes: np.ndarray = field(repr=False)
    t0: float = 1.0
    level: int = 0
    endpoint_exponent: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DiscretizationError("a time grid needs at least two nodes")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise DiscretizationError("time nodes must start at 0 and increase strictly")
        if not 0.0 <= self.endpoint_exponent < 1.0:
            raise DiscretizationError("endpoint exponent must lie in [0, 1)")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def graded(cls, t0: float, t_max: float, core_points: int = 40, tail_step: float = 0.05,
               t_min: float = 1e-3) -> "TimeGrid":
        """Geometric nodes on [t_min, t0), uniform nodes on [t0, t_max]."""
        if not 0 < t_min < t0:
            raise DiscretizationError("need 0 < t_min < t0")
        core = np.geomspace(t_min, t0, core_points, endpoint=False)
        if t_max > t0:
            steps = max(1, math.ceil((t_max - t0) / tail_step))
            tail = np.linspace(t0, t_max, steps + 1)
        else:
            tail = np.array([t0]) if t_max == t0 else np.array([])
            core = core[core < t_max]
            tail = np.append(tail, t_max) if t_max < t0 else tail
        return cls(np.concatenate([[0.0], core, tail]), t0=t0)

    @classmethod
    def uniform(cls, t_max: float, intervals: int, t0: float = 1.0) -> "TimeGrid":
        return cls(np.linspace(0.0, t_max, intervals + 1), t0=t0)

    @classmethod
    def geometric(cls, T: float, points: int = 40, t_min_ratio: float = 1e-3) -> "TimeGrid":
        """Local-theory grid on (0, T], graded towards 0."""
        return cls(np.concatenate([[0.0], np.geomspace(T * t_min_ratio, T, points)]), t0=T)

    @property
    def t_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def evaluation_nodes(self) -> np.ndarray:
        return self.nodes[1:]

    def __len__(self) -> int:
        return self.nodes.size

    def with_endpoint_exponent(self, gamma: float) -> "TimeGrid":
        return replace(self, endpoint_exponent=gamma)

    def index_of(self, t: float) -> int:
        """Index of a grid node; off-grid times are rejected, never interpolated."""
        k = int(np.searchsorted(self.nodes, t))
        for j in (k - 1, k):
            if 0 <= j < self.nodes.size and math.isclose(self.nodes[j], t, rel_tol=1e-12, abs_tol=1e-14):
                return j
        raise InterpolationRequiredError(f"t={t!r} is not a node of the time grid")

    def refined(self) -> "TimeGrid":
        """Midpoints inserted in every panel."""
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        merged = np.empty(2 * self.nodes.size - 1)
        merged[0::2] = self.nodes
        merged[1::2] = mids
        return TimeGrid(merged, t0=self.t0, level=self.level + 1, endpoint_exponent=self.endpoint_exponent)

    def restricted(self, t_end: float) -> "TimeGrid":
        """Prefix of the grid up to the node t_end."""
        k = self.index_of(t_end)
        return TimeGrid(self.nodes[: k + 1].copy(), t0=self.t0, level=self.level,
                        endpoint_exponent=self.endpoint_exponent)
