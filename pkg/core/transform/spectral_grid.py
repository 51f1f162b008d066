"""
Spectral grids and profiles for the spherical transform.

Weights include the Plancherel density, so sum(v * ĝ * φ_λ(r)) is the
(uncalibrated) inversion integral.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.errors import DiscretizationError, IncompatibleGridError
from core.geometry.grid import RadialGrid, composite_gauss_legendre
from core.geometry.space import HyperbolicSpace


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    n: int
    lambda_max: float
    num_points: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    order: int = 8
    density_scale: float = 1.0

    def __post_init__(self):
        if len(self.nodes) != self.num_points or len(self.weights) != self.num_points:
            raise DiscretizationError("spectral arrays do not match num_points")
        if np.any(np.diff(self.nodes) <= 0) or self.nodes[0] < 0:
            raise DiscretizationError("spectral nodes must be strictly increasing and nonnegative")
        if np.any(self.weights < 0):
            raise DiscretizationError("spectral weights must be nonnegative")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def gauss_legendre(
        cls,
        space: HyperbolicSpace,
        lambda_max: float,
        num_points: int,
        order: int = 8,
        density_scale: float = 1.0,
    ) -> "SpectralGrid":
        if lambda_max <= 0:
            raise DiscretizationError("lambda_max must be positive")
        if num_points < order:
            raise DiscretizationError(f"need at least one panel of {order} nodes")
        panels = math.ceil(num_points / order)
        nodes, dx = composite_gauss_legendre(lambda_max, panels, order)
        weights = dx * space.plancherel_density(nodes) * density_scale
        return cls(space.n, float(lambda_max), len(nodes), nodes, weights, order, float(density_scale))

    @classmethod
    def for_reach(cls, space: HyperbolicSpace, lambda_max: float, reach: float, order: int = 8) -> "SpectralGrid":
        """
        Panels narrow enough to integrate e^{iλs} for |s| <= reach.

        reach is the largest r + |t| the grid will be evaluated at.
        """
        panels = max(1, math.ceil(lambda_max * reach / math.pi))
        return cls.gauss_legendre(space, lambda_max, panels * order, order)

    @property
    def key(self) -> Tuple:
        return (self.n, self.lambda_max, self.num_points, self.order)

    def refined(self) -> "SpectralGrid":
        return SpectralGrid.gauss_legendre(
            HyperbolicSpace(self.n), self.lambda_max, 2 * self.num_points, self.order, self.density_scale
        )

    def profile(self, values) -> "SpectralProfile":
        return SpectralProfile(self, np.asarray(values, dtype=float))

    def zeros(self) -> "SpectralProfile":
        return SpectralProfile(self, np.zeros(self.num_points))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SpectralGrid)
            and self.key == other.key
            and self.density_scale == other.density_scale
        )

    def __hash__(self) -> int:
        return hash(self.key)


def default_lambda_max(grid: RadialGrid) -> float:
    """Nyquist-like cutoff π·N_r/r_max."""
    return math.pi * grid.num_points / grid.r_max


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    grid: SpectralGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.num_points,):
            raise IncompatibleGridError(
                f"spectral profile has {values.shape} values for {self.grid.num_points} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise DiscretizationError("spectral values must be finite")
        object.__setattr__(self, "values", values)

    def _coerce(self, other):
        if isinstance(other, SpectralProfile):
            if other.grid != self.grid:
                raise IncompatibleGridError("spectral profiles live on different grids")
            return other.values
        return other

    def __add__(self, other) -> "SpectralProfile":
        return SpectralProfile(self.grid, self.values + self._coerce(other))

    def __sub__(self, other) -> "SpectralProfile":
        return SpectralProfile(self.grid, self.values - self._coerce(other))

    def __mul__(self, other) -> "SpectralProfile":
        return SpectralProfile(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralProfile":
        return SpectralProfile(self.grid, -self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm_squared(self) -> float:
        """Σ v_j ĝ_j², the uncalibrated spectral side of Plancherel."""
        return float(np.sum(self.grid.weights * self.values ** 2))
