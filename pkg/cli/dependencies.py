"""Numerical components of one run, built lazily from an ExperimentConfig."""
import logging
from functools import cached_property
from typing import Optional

from cli.schemas import ExperimentConfig
from core.geometry.grid import RadialGrid
from core.geometry.space import HyperbolicSpace
from core.params.parameter_set import ParameterSet, derive
from core.propagator.wave_group import KleinGordonPropagator, MassParameter, WaveState
from core.solver.data import bump_data, bump_difference
from core.solver.nonlinearity import Nonlinearity
from core.solver.picard import PicardSolver
from core.solver.time_grid import TimeGrid
from core.transform.spectral_grid import SpectralGrid, default_lambda_max
from core.transform.spherical_transform import SphericalTransform

logger = logging.getLogger(__name__)


class RunContext:
    def __init__(self, config: ExperimentConfig, refinement: int = 0):
        self.config = config
        self.refinement = refinement

    def refined(self) -> "RunContext":
        """Same run with radial, spectral and time grids doubled."""
        return RunContext(self.config, self.refinement + 1)

    @cached_property
    def space(self) -> HyperbolicSpace:
        return HyperbolicSpace(self.config.n)

    @cached_property
    def radial(self) -> RadialGrid:
        grid = RadialGrid.gauss_legendre(self.space, self.config.r_max, self.config.n_r, self.config.order)
        for _ in range(self.refinement):
            grid = grid.refined()
        return grid

    @property
    def lambda_max(self) -> float:
        value = self.config.lambda_max
        return default_lambda_max(self.radial) if value == "auto" else float(value)

    @property
    def reach(self) -> float:
        """Largest r + |t| at which spectral data are inverted."""
        horizon = max(self.config.t_max, self.config.dispersive_t_max)
        return self.config.r_max + horizon

    @cached_property
    def spectral(self) -> SpectralGrid:
        if self.config.n_lambda is not None:
            grid = SpectralGrid.gauss_legendre(self.space, self.lambda_max, self.config.n_lambda, self.config.order)
        else:
            grid = SpectralGrid.for_reach(self.space, self.lambda_max, self.reach, self.config.order)
        for _ in range(self.refinement):
            grid = grid.refined()
        return grid

    @cached_property
    def transform(self) -> SphericalTransform:
        logger.info(
            "building transform: n=%d, N_r=%d, N_lambda=%d, lambda_max=%.4g",
            self.config.n, self.radial.num_points, self.spectral.num_points, self.lambda_max,
        )
        return SphericalTransform.build(self.radial, self.spectral)

    @cached_property
    def mass(self) -> MassParameter:
        return MassParameter.from_config(self.config.c, self.config.n)

    @cached_property
    def propagator(self) -> KleinGordonPropagator:
        return KleinGordonPropagator(self.transform, self.mass)

    @cached_property
    def params(self) -> ParameterSet:
        cfg = self.config
        return derive(cfg.n, cfg.b, cfg.sigma, h=cfg.h, d=cfg.d, t0=cfg.t0, delta=cfg.delta)

    @cached_property
    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(self.config.b, self.config.mu, self.config.sign)

    @cached_property
    def time_grid(self) -> TimeGrid:
        cfg = self.config
        grid = TimeGrid.graded(cfg.t0, cfg.t_max, cfg.core_points, cfg.tail_step, cfg.t_min)
        for _ in range(self.refinement):
            grid = grid.refined()
        return grid

    @cached_property
    def solver(self) -> PicardSolver:
        return PicardSolver(self.propagator, self.nonlinearity, progress=self.config.progress)

    def bump(self, amplitude: float = 1.0) -> WaveState:
        return bump_data(self.radial, self.config.bump_width, amplitude)

    def scaled_data(self, shape: Optional[WaveState] = None):
        """
        Data of size ε: the configured ε, or the automatic 2^-k choice.
        Returns (ε, data).
        """
        shape = shape if shape is not None else self.bump()
        ps = self.params
        if self.config.epsilon is not None:
            base = self.solver.linear_norm(shape, ps, self.time_grid)
            return self.config.epsilon, shape.scaled(self.config.epsilon / base)
        epsilon, data, _ = self.solver.choose_epsilon(shape, ps, self.time_grid)
        return epsilon, data

    def paired_data(self):
        """(data_a, data_b) for the stability experiment."""
        _, data_a = self.scaled_data()
        amplitude = self.config.difference_amplitude * float(data_a.ut.sup_norm())
        width = 1.5 * self.config.bump_width
        width = min(width, self.config.r_max / 5.0)
        return data_a, bump_difference(self.radial, data_a, width, amplitude)
