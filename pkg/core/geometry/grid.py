"""
Radial grids and profiles.

A RadialGrid carries nodes on [0, r_max] together with quadrature weights
for the polar measure Ω_{n-1} sinh^{n-1} r dr, so that sum(w * f) integrates a
radial function over the ball B_{r_max}.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple, Union

import numpy as np

from core.errors import DiscretizationError, IncompatibleGridError
from core.geometry.space import HyperbolicSpace, ball_volume

GAUSS_LEGENDRE = "gauss_legendre"
UNIFORM = "uniform"


def composite_gauss_legendre(upper: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and plain dx-weights of a composite Gauss–Legendre rule on [0, upper]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True, eq=False)
class RadialGrid:
    n: int
    r_max: float
    num_points: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    rule: str = GAUSS_LEGENDRE
    order: int = 8

    def __post_init__(self):
        if len(self.nodes) != self.num_points or len(self.weights) != self.num_points:
            raise DiscretizationError("grid arrays do not match num_points")
        if np.any(np.diff(self.nodes) <= 0) or self.nodes[0] < 0:
            raise DiscretizationError("radial nodes must be strictly increasing and nonnegative")
        if np.any(self.weights < 0):
            raise DiscretizationError("radial weights must be nonnegative")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def gauss_legendre(cls, space: HyperbolicSpace, r_max: float, num_points: int, order: int = 8) -> "RadialGrid":
        """Composite Gauss–Legendre grid; num_points is rounded up to whole panels."""
        if r_max <= 0:
            raise DiscretizationError("r_max must be positive")
        if num_points < 5 or order < 3:
            raise DiscretizationError(f"need at least 5 nodes and order >= 3, got {num_points}/{order}")
        panels = max(1, math.ceil(num_points / order))
        nodes, dx = composite_gauss_legendre(r_max, panels, order)
        weights = dx * space.volume_density(nodes)
        return cls(space.n, float(r_max), len(nodes), nodes, weights, GAUSS_LEGENDRE, order)

    @classmethod
    def uniform(cls, space: HyperbolicSpace, r_max: float, num_points: int) -> "RadialGrid":
        """Equispaced nodes from 0 with trapezoid weights."""
        if num_points < 5:
            raise DiscretizationError(f"need at least 5 nodes, got {num_points}")
        nodes = np.linspace(0.0, r_max, num_points)
        h = nodes[1] - nodes[0]
        dx = np.full(num_points, h)
        dx[0] = dx[-1] = 0.5 * h
        weights = dx * space.volume_density(nodes)
        return cls(space.n, float(r_max), num_points, nodes, weights, UNIFORM, 2)

    @property
    def space(self) -> HyperbolicSpace:
        return HyperbolicSpace(self.n)

    @property
    def key(self) -> Tuple:
        return (self.n, self.rule, self.r_max, self.num_points, self.order)

    @property
    def panels(self) -> int:
        return self.num_points // self.order if self.rule == GAUSS_LEGENDRE else self.num_points - 1

    @property
    def total_volume(self) -> float:
        return float(self.weights.sum())

    def volume_error(self) -> float:
        """Relative error of the weight sum against the exact ball volume."""
        exact = ball_volume(self.n, self.r_max)
        return abs(self.total_volume - exact) / exact

    def refined(self) -> "RadialGrid":
        """Same rule with twice the nodes."""
        if self.rule == UNIFORM:
            return RadialGrid.uniform(self.space, self.r_max, 2 * self.num_points - 1)
        return RadialGrid.gauss_legendre(self.space, self.r_max, 2 * self.num_points, self.order)

    def profile(self, values) -> "RadialProfile":
        return RadialProfile(self, np.asarray(values, dtype=float))

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> "RadialProfile":
        return RadialProfile(self, np.asarray(fn(self.nodes), dtype=float) * np.ones(self.num_points))

    def zeros(self) -> "RadialProfile":
        return RadialProfile(self, np.zeros(self.num_points))

    def __eq__(self, other) -> bool:
        return isinstance(other, RadialGrid) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


Number = Union[int, float]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.num_points,):
            raise IncompatibleGridError(
                f"profile has {values.shape} values for a grid of {self.grid.num_points} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise DiscretizationError("profile values must be finite")
        object.__setattr__(self, "values", values)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, RadialProfile):
            if other.grid != self.grid:
                raise IncompatibleGridError("profiles live on different radial grids")
            return other.values
        return other

    def __add__(self, other) -> "RadialProfile":
        return RadialProfile(self.grid, self.values + self._coerce(other))

    def __sub__(self, other) -> "RadialProfile":
        return RadialProfile(self.grid, self.values - self._coerce(other))

    def __mul__(self, other) -> "RadialProfile":
        return RadialProfile(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "RadialProfile":
        return RadialProfile(self.grid, -self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def lp_norm(self, p: float) -> float:
        """Classical L^p norm by grid quadrature."""
        a = np.abs(self.values)
        if math.isinf(p):
            return float(a.max())
        return float(np.sum(self.grid.weights * a ** p) ** (1.0 / p))

    def integral(self) -> float:
        return float(np.sum(self.grid.weights * self.values))


def indicator_ball(grid: RadialGrid, R: float) -> RadialProfile:
    return RadialProfile(grid, (grid.nodes < R).astype(float))


def check_same_grid(*profiles: RadialProfile) -> RadialGrid:
    grid = profiles[0].grid
    for p in profiles[1:]:
        if p.grid != grid:
            raise IncompatibleGridError(
                "profiles live on different radial grids",
            )
    return grid


__all__ = [
    "RadialGrid",
    "RadialProfile",
    "composite_gauss_legendre",
    "indicator_ball",
    "check_same_grid",
    "GAUSS_LEGENDRE",
    "UNIFORM",
]
