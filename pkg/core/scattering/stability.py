"""
Paired solves for the exponential stability statement: the weighted trace
of the free difference and the weighted trace of the solution difference,
plus the quasi-triangle audit linking them through the Duhamel difference.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.lorentz.norms import lorentz_norms
from core.lorentz.rearrangement import LorentzExponents
from core.params.parameter_set import ParameterSet
from core.propagator.wave_group import WaveState
from core.scattering.decay_fit import is_decreasing
from core.solver.duhamel import ProductIntegrator
from core.solver.picard import ContractionDiagnostics, PicardSolver, TrajectorySolution
from core.solver.time_grid import TimeGrid

logger = logging.getLogger(__name__)


@dataclass
class StabilityReport:
    h: float
    d: float
    audit_constant: float
    times: np.ndarray = field(repr=False)
    linear_trace: np.ndarray = field(repr=False)
    solution_trace: np.ndarray = field(repr=False)
    duhamel_trace: np.ndarray = field(repr=False)
    window: Tuple[float, float] = (0.0, math.inf)
    diagnostics: Tuple[Optional[ContractionDiagnostics], Optional[ContractionDiagnostics]] = (None, None)
    trajectories: Tuple[Optional[TrajectorySolution], Optional[TrajectorySolution]] = field(default=(None, None), repr=False)

    def _windowed(self, trace: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mask = (self.times >= self.window[0]) & (self.times <= self.window[1])
        return self.times[mask], trace[mask]

    @property
    def identical(self) -> bool:
        return bool(np.all(self.linear_trace == 0.0) and np.all(self.solution_trace == 0.0))

    @property
    def linear_decreasing(self) -> bool:
        return is_decreasing(*self._windowed(self.linear_trace))

    @property
    def solution_decreasing(self) -> bool:
        return is_decreasing(*self._windowed(self.solution_trace))

    @property
    def forward_implication(self) -> bool:
        """Free difference decaying implies solution difference decaying."""
        return (not self.linear_decreasing) or self.solution_decreasing

    @property
    def audit_holds(self) -> bool:
        """linear <= C·(solution + duhamel) at every sample, C the quasi-triangle constant."""
        rhs = self.audit_constant * (self.solution_trace + self.duhamel_trace)
        return bool(np.all(self.linear_trace <= rhs * (1.0 + 1e-9) + 1e-300))

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"t": t, "linear_trace": a, "solution_trace": b, "duhamel_trace": c}
            for t, a, b, c in zip(self.times, self.linear_trace, self.solution_trace, self.duhamel_trace)
        ]


def quasi_triangle_constant(p: float) -> float:
    """‖f+g‖_{(p,q)} <= 2^{1/p}(‖f‖_{(p,q)} + ‖g‖_{(p,q)})."""
    return 2.0 ** (1.0 / p)


def _solve_pair(solver: PicardSolver, data_a: WaveState, data_b: WaveState, ps: ParameterSet, time_grid: TimeGrid,
                max_iter: int, tol: float, threads: int):
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(solver.solve_global, data, ps, time_grid, max_iter, tol) for data in (data_a, data_b)]
        return [future.result() for future in futures]


def stability_experiment(data_a: WaveState, data_b: WaveState, solver: PicardSolver, ps: ParameterSet,
                         time_grid: TimeGrid, h: float = 0.0, d: Optional[float] = None, max_iter: int = 50,
                         tol: float = 1e-8, threads: int = 1,
                         window: Optional[Tuple[float, float]] = None) -> StabilityReport:
    d = ps.d if d is None else d
    (traj_a, diag_a), (traj_b, diag_b) = _solve_pair(solver, data_a, data_b, ps, time_grid, max_iter, tol, threads)
    report = compare_trajectories(traj_a, traj_b, ps, h, d, window, (diag_a, diag_b))
    report.trajectories = (traj_a, traj_b)
    return report


def compare_trajectories(traj_a: TrajectorySolution, traj_b: TrajectorySolution, ps: ParameterSet, h: float,
                         d: float, window: Optional[Tuple[float, float]] = None,
                         diagnostics=(None, None)) -> StabilityReport:
    transform = traj_a.transform
    weights = transform.radial.weights
    e = LorentzExponents(ps.p, d)
    nodes = traj_a.time_grid.nodes
    tail = nodes >= ps.t0
    times = nodes[tail]
    weight = np.exp((ps.alpha + h) * times)

    linear_a, _ = traj_a.linear_hat()
    linear_b, _ = traj_b.linear_hat()
    linear_diff = transform.inverse_values((linear_a - linear_b)[tail])
    solution_diff = (traj_a.values() - traj_b.values())[tail]

    integrator = ProductIntegrator(traj_a.time_grid, traj_a.propagator.omega)
    duhamel_hat, _ = integrator.apply(traj_a.forcing_hat() - traj_b.forcing_hat())
    duhamel_diff = transform.inverse_values(duhamel_hat[tail])

    if window is None:
        window = (ps.t0 + 1.0, traj_a.time_grid.t_max)
    report = StabilityReport(
        h=h,
        d=d,
        audit_constant=quasi_triangle_constant(ps.p),
        times=times,
        linear_trace=weight * lorentz_norms(linear_diff, weights, e),
        solution_trace=weight * lorentz_norms(solution_diff, weights, e),
        duhamel_trace=weight * lorentz_norms(duhamel_diff, weights, e),
        window=window,
        diagnostics=tuple(diagnostics),
    )
    logger.info(
        "stability h=%g: linear decreasing=%s, solution decreasing=%s, audit=%s",
        h, report.linear_decreasing, report.solution_decreasing, report.audit_holds,
    )
    return report
