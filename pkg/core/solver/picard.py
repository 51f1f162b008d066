"""
Picard iteration for the Duhamel equation

    u(t) = Ẇ(t)u0 + W(t)u1 + ∫₀ᵗ W(t-s) F(u(s)) ds.

Iterates live on the spectral side as (N_t, N_λ) blocks; every iteration
maps them to physical space once to evaluate F and the Lorentz norms.
Global runs are measured in E_{α,α̃}; local runs in sup |t|^β‖u‖_{(b+1,d)}.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from core.errors import (
    ConstraintViolationError,
    DivergenceError,
    LocalSolveError,
    ResolutionError,
    violation,
)
from core.estimates.weighted_norms import weighted_sup
from core.geometry.grid import RadialProfile
from core.lorentz.norms import norm_from_rearrangement
from core.lorentz.rearrangement import LorentzExponents, sort_by_magnitude
from core.params.parameter_set import ParameterSet, beta_of, local_upper_bound
from core.propagator.wave_group import KleinGordonPropagator, WaveState
from core.solver.duhamel import ProductIntegrator
from core.solver.nonlinearity import Nonlinearity
from core.solver.time_grid import TimeGrid

logger = logging.getLogger(__name__)

DIVERGENCE_STREAK = 3
LOCAL_T_FLOOR = 1e-4
EPSILON_TARGET_L = 0.5

WeightFn = Callable[[np.ndarray], float]


@dataclass
class RegularityTrace:
    """Γ^d_{m,h} over the iterates and the measured 𝒦_{d,h}, L_{d,h}."""
    d: float
    h: float
    gammas: List[float] = field(default_factory=list)
    K: float = 0.0
    L: float = math.nan

    @property
    def bound(self) -> float:
        if not self.L < 1.0:
            return math.inf
        return self.gammas[0] / (1.0 - self.L)

    @property
    def holds(self) -> bool:
        bound = self.bound
        return all(g <= bound * (1.0 + 1e-12) for g in self.gammas)


@dataclass
class ContractionDiagnostics:
    K_measured: float
    epsilon: float
    L: float
    b: float
    diff_norms: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    iterate_norms: List[float] = field(default_factory=list)
    regularity: Dict[Tuple[float, float], RegularityTrace] = field(default_factory=dict)

    @property
    def solution_norm(self) -> float:
        return self.iterate_norms[-1]

    @property
    def within_ball(self) -> bool:
        """‖u‖ <= 2ε with ε the norm of the free evolution."""
        return self.solution_norm <= 2.0 * self.epsilon * (1.0 + 1e-12)

    @property
    def ratios_bounded(self) -> bool:
        """Every difference ratio is at most the measured L."""
        return all(r <= self.L * (1.0 + 1e-12) for r in self.ratios)

    def rows(self) -> List[Dict[str, float]]:
        """Iteration log: (m, diff_norm_E, ratio, Γ columns)."""
        out = []
        for m, diff in enumerate(self.diff_norms, start=1):
            row = {"m": m, "diff_norm_E": diff, "ratio": self.ratios[m - 2] if m >= 2 else math.nan}
            for (d, h), trace in self.regularity.items():
                key = f"gamma_d{d:g}_h{h:.6g}"
                row[key] = trace.gammas[m - 1] if m - 1 < len(trace.gammas) else math.nan
            out.append(row)
        return out


@dataclass(eq=False)
class TrajectorySolution:
    time_grid: TimeGrid
    u_hat: np.ndarray = field(repr=False)
    ut_hat: np.ndarray = field(repr=False)
    data: WaveState = field(repr=False)
    propagator: KleinGordonPropagator = field(repr=False)
    nonlinearity: Nonlinearity
    iterations: int
    converged: bool
    direction: int = 1
    d: float = math.inf
    diagnostics: Optional[ContractionDiagnostics] = None
    norm_cache: Dict[Tuple[float, float], np.ndarray] = field(default_factory=dict, repr=False)
    _values: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def transform(self):
        return self.propagator.transform

    @property
    def times(self) -> np.ndarray:
        """Physical times: the grid nodes, reflected for backward runs."""
        return self.direction * self.time_grid.nodes

    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.transform.inverse_values(self.u_hat)
        return self._values

    def norms(self, e: LorentzExponents) -> np.ndarray:
        """‖u(t_k)‖_{(p,q)} at every node, cached per exponent pair."""
        key = (e.p, e.q)
        if key not in self.norm_cache:
            sorted_values, levels = sort_by_magnitude(self.values(), self.transform.radial.weights)
            self.norm_cache[key] = norm_from_rearrangement(sorted_values, levels, e)
        return self.norm_cache[key]

    def profile(self, k: int) -> RadialProfile:
        return RadialProfile(self.transform.radial, self.values()[k])

    def state(self, k: int) -> WaveState:
        radial = self.transform.radial
        ut = self.transform.inverse_values(self.ut_hat[k]) * self.direction
        return WaveState(RadialProfile(radial, self.values()[k]), RadialProfile(radial, ut))

    def data_hat(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.transform.forward(self.data.u).values, self.transform.forward(self.data.ut).values

    def linear_hat(self) -> Tuple[np.ndarray, np.ndarray]:
        u0, u1 = self.data_hat()
        return self.propagator.flow_spectral(self.time_grid.nodes, u0, u1)

    def forcing_hat(self) -> np.ndarray:
        return self.transform.forward_values(self.nonlinearity.evaluate(self.values()))

    def replaced(self, u_hat: np.ndarray, ut_hat: np.ndarray) -> "TrajectorySolution":
        """Same run with new spectral values; caches are not carried over."""
        return TrajectorySolution(
            self.time_grid, u_hat, ut_hat, self.data, self.propagator, self.nonlinearity,
            self.iterations, self.converged, self.direction, self.d, self.diagnostics,
        )

    def rows(self, p: float) -> List[Dict[str, float]]:
        """Solution dump: (t, norm_(p,inf), norm_(p,d))."""
        sup_norms = self.norms(LorentzExponents(p, math.inf))
        d_norms = self.norms(LorentzExponents(p, self.d))
        return [
            {"t": t, "norm_inf": a, "norm_d": b}
            for t, a, b in zip(self.times, sup_norms, d_norms)
        ]


@dataclass(eq=False)
class LocalSolution:
    """The two half-line runs of a local solve on [-T, T]."""
    forward: TrajectorySolution
    backward: TrajectorySolution

    @property
    def halves(self) -> Tuple[TrajectorySolution, TrajectorySolution]:
        return self.forward, self.backward

    @property
    def T(self) -> float:
        return self.forward.time_grid.t_max

    @property
    def converged(self) -> bool:
        return self.forward.converged and self.backward.converged

    @property
    def iterations(self) -> int:
        return max(self.forward.iterations, self.backward.iterations)

    def rows(self, p: float) -> List[Dict[str, float]]:
        """Solution dump over [-T, T] in increasing t; t = 0 appears once."""
        return self.backward.rows(p)[:0:-1] + self.forward.rows(p)


def with_forcing_exponent(time_grid: TimeGrid, gamma: float) -> TimeGrid:
    """Grid whose first Duhamel panel integrates the s^-γ forcing profile, unless one is already set."""
    if time_grid.endpoint_exponent > 0.0:
        return time_grid
    return time_grid.with_endpoint_exponent(gamma)


def _norm_table(values: np.ndarray, weights: np.ndarray, exponents: Iterable[LorentzExponents]) -> Dict[float, np.ndarray]:
    """Norms for several exponent pairs sharing one sort."""
    sorted_values, levels = sort_by_magnitude(values, weights)
    return {e.q: norm_from_rearrangement(sorted_values, levels, e) for e in exponents}


def global_weight(ps: ParameterSet, times: np.ndarray, h: float = 0.0) -> WeightFn:
    return lambda norms: weighted_sup(times, norms, ps.alpha, ps.alpha_tilde, ps.t0, h)


def local_weight(beta: float, times: np.ndarray) -> WeightFn:
    factor = np.abs(times) ** beta
    return lambda norms: float(np.max(factor * norms, initial=0.0))


class PicardSolver:
    """Picard iteration for one propagator and one nonlinearity."""

    def __init__(self, propagator: KleinGordonPropagator, nonlinearity: Nonlinearity, progress: bool = False):
        self.propagator = propagator
        self.nonlinearity = nonlinearity
        self.progress = progress

    @property
    def transform(self):
        return self.propagator.transform

    def _data_hat(self, data: WaveState) -> Tuple[np.ndarray, np.ndarray]:
        return self.transform.forward(data.u).values, self.transform.forward(data.ut).values

    def linear_norm(self, data: WaveState, ps: ParameterSet, time_grid: TimeGrid, d: Optional[float] = None) -> float:
        """‖v1‖_E on the forward half line of the grid."""
        u0, u1 = self._data_hat(data)
        v1_hat, _ = self.propagator.flow_spectral(time_grid.nodes, u0, u1)
        e = LorentzExponents(ps.p, ps.d if d is None else d)
        norms = _norm_table(self.transform.inverse_values(v1_hat[1:]), self.transform.radial.weights, [e])[e.q]
        return global_weight(ps, time_grid.evaluation_nodes)(norms)

    def _iterate(self, data: WaveState, time_grid: TimeGrid, b: float, d: float, weight: WeightFn,
                 max_iter: int, tol: float, traces: Dict[Tuple[float, float], WeightFn], direction: int,
                 regularity_ds: Dict[float, LorentzExponents]):
        nl = self.nonlinearity
        weights = self.transform.radial.weights
        main = LorentzExponents(b + 1.0, d)
        exponents = {main.q: main, **{e.q: e for e in regularity_ds.values()}}
        integrator = ProductIntegrator(time_grid, self.propagator.omega)

        u0_hat, u1_hat = self._data_hat(data)
        v1_hat, v1t_hat = self.propagator.flow_spectral(time_grid.nodes, u0_hat, u1_hat)
        v1 = self.transform.inverse_values(v1_hat)

        table = _norm_table(v1[1:], weights, exponents.values())
        epsilon = weight(table[main.q])
        diagnostics = ContractionDiagnostics(K_measured=0.0, epsilon=epsilon, L=math.nan, b=b)
        diagnostics.iterate_norms.append(epsilon)
        for key, fn in traces.items():
            diagnostics.regularity[key] = RegularityTrace(d=key[0], h=key[1], gammas=[fn(table[key[0]])])

        current_hat, current_t_hat, current = v1_hat, v1t_hat, v1
        previous_E = 0.0
        previous_diff = epsilon
        converged = False
        streak = 0
        iterations = 0
        for m in tqdm(range(1, max_iter + 1), desc="picard", disable=not self.progress, leave=False):
            iterations = m
            forcing_hat = self.transform.forward_values(nl.evaluate(current))
            t_hat, tt_hat = integrator.apply(forcing_hat)
            new_hat = v1_hat + t_hat
            new_t_hat = v1t_hat + tt_hat
            new = self.transform.inverse_values(new_hat)

            current_E = diagnostics.iterate_norms[-1]
            diff = weight(_norm_table(new[1:] - current[1:], weights, [main])[main.q])
            table = _norm_table(new[1:], weights, exponents.values())
            new_E = weight(table[main.q])
            diagnostics.diff_norms.append(diff)
            diagnostics.iterate_norms.append(new_E)

            denominator = previous_diff * (current_E ** (b - 1.0) + previous_E ** (b - 1.0))
            if denominator > 0.0:
                diagnostics.K_measured = max(diagnostics.K_measured, diff / denominator)
            if m >= 2:
                ratio = diff / previous_diff if previous_diff > 0.0 else 0.0
                diagnostics.ratios.append(ratio)
                streak = streak + 1 if ratio >= 1.0 else 0

            if traces:
                duhamel_table = _norm_table(new[1:] - v1[1:], weights, regularity_ds.values())
                for key, fn in traces.items():
                    trace = diagnostics.regularity[key]
                    gamma_m = trace.gammas[-1]
                    gamma_next = fn(table[key[0]])
                    step = max(gamma_next - trace.gammas[0], fn(duhamel_table[key[0]]))
                    scale = current_E ** (b - 1.0) * gamma_m
                    if scale > 0.0:
                        trace.K = max(trace.K, step / scale)
                    trace.gammas.append(gamma_next)

            logger.info("picard m=%d diff=%.6e norm=%.6e", m, diff, new_E)
            current_hat, current_t_hat, current = new_hat, new_t_hat, new
            previous_E, previous_diff = current_E, diff
            if streak >= DIVERGENCE_STREAK:
                raise DivergenceError(
                    "Picard differences stopped contracting; reduce the data size epsilon",
                    diagnostics.diff_norms,
                )
            if diff < tol:
                converged = True
                break

        diagnostics.L = diagnostics.K_measured * 2.0 ** b * epsilon ** (b - 1.0)
        for trace in diagnostics.regularity.values():
            trace.L = trace.K * 2.0 ** (b - 1.0) * epsilon ** (b - 1.0)
        if not converged:
            logger.warning("picard stopped after %d iterations without reaching tol=%g", iterations, tol)
        if diagnostics.L >= 1.0:
            logger.warning("measured contraction constant L=%.4g >= 1", diagnostics.L)

        trajectory = TrajectorySolution(
            time_grid=time_grid, u_hat=current_hat, ut_hat=current_t_hat, data=data,
            propagator=self.propagator, nonlinearity=nl, iterations=iterations, converged=converged,
            direction=direction, d=d, diagnostics=diagnostics,
        )
        trajectory._values = current
        return trajectory, diagnostics

    def solve_global(self, data: WaveState, ps: ParameterSet, time_grid: TimeGrid, max_iter: int = 50,
                     tol: float = 1e-8, regularity: Iterable[Tuple[float, float]] = (),
                     direction: int = 1) -> Tuple[TrajectorySolution, ContractionDiagnostics]:
        """
        Global small-data solve on the forward half line of time_grid.

        direction=-1 solves for t <= 0 by running the forward machinery on
        the reflected data (u0, -u1).
        """
        if self.nonlinearity.b != ps.b:
            raise ConstraintViolationError(
                "nonlinearity power differs from the parameter set",
                [violation("b", f"nonlinearity b == {ps.b}", self.nonlinearity.b)],
            )
        source = data if direction == 1 else data.reflected()
        time_grid = with_forcing_exponent(time_grid, ps.b_alpha_tilde)
        times = time_grid.evaluation_nodes
        regularity = list(regularity)
        traces = {(float(d), float(h)): global_weight(ps, times, h) for d, h in regularity}
        regularity_ds = {float(d): LorentzExponents(ps.p, float(d)) for d, _ in regularity}
        trajectory, diagnostics = self._iterate(
            source, time_grid, ps.b, ps.d, global_weight(ps, times), max_iter, tol, traces, direction, regularity_ds,
        )
        logger.info(
            "global solve: %d iterations, converged=%s, epsilon=%.4e, L=%.4g",
            trajectory.iterations, trajectory.converged, diagnostics.epsilon, diagnostics.L,
        )
        return trajectory, diagnostics

    def solve_local(self, data: WaveState, T: float, tol: float = 1e-8, max_iter: int = 50,
                    d: float = math.inf, points: int = 40) -> LocalSolution:
        """
        Large-data solve on [-T, T] with weight |t|^β.

        Both half lines are iterated on the same graded grid, the backward one
        from the reflected data; T is halved until both contract.
        """
        b = self.nonlinearity.b
        n = self.propagator.n
        upper = local_upper_bound(n)
        if not 1.0 < b < upper:
            raise ConstraintViolationError(
                "local theory needs 1 < b < (n+1+sqrt(n^2+10n-7))/(2(n-1))",
                [violation("b", f"1 < b < {upper:.6g}", b)],
            )
        beta = beta_of(n, b)
        while T >= LOCAL_T_FLOOR:
            grid = TimeGrid.geometric(T, points).with_endpoint_exponent(b * beta)
            weight = local_weight(beta, grid.evaluation_nodes)
            halves = []
            for direction in (1, -1):
                source = data if direction == 1 else data.reflected()
                try:
                    trajectory, _ = self._iterate(source, grid, b, d, weight, max_iter, tol, {}, direction, {})
                except DivergenceError:
                    break
                if not trajectory.converged:
                    break
                halves.append(trajectory)
            if len(halves) == 2:
                logger.info("local solve contracted on [-%g, %g]", T, T)
                return LocalSolution(*halves)
            logger.info("no contraction on [-%g, %g]; halving T", T, T)
            T /= 2.0
        raise LocalSolveError(f"no contraction for any T >= {LOCAL_T_FLOOR:g}")

    def residual(self, trajectory: TrajectorySolution, d: Optional[float] = None, level: int = 1) -> float:
        """
        max_k ‖u(t_k) - [Ẇ(t_k)u0 + W(t_k)u1 + 𝒯(u)(t_k)]‖_{(b+1,d)} with the
        convolution evaluated by the subdivided Gauss-Legendre oracle.
        """
        d = trajectory.d if d is None else d
        oracle = ProductIntegrator(trajectory.time_grid, self.propagator.omega, exact=False, level=level)
        v1_hat, _ = trajectory.linear_hat()
        duhamel_hat, _ = oracle.apply(trajectory.forcing_hat())
        defect = trajectory.values() - self.transform.inverse_values(v1_hat + duhamel_hat)
        e = LorentzExponents(self.nonlinearity.b + 1.0, d)
        norms = _norm_table(defect[1:], self.transform.radial.weights, [e])[e.q]
        return float(np.max(norms, initial=0.0))

    def duhamel(self, trajectory: TrajectorySolution, t: float) -> RadialProfile:
        """𝒯(u)(t) at a grid node; off-grid times raise InterpolationRequiredError."""
        k = trajectory.time_grid.index_of(t)
        if k == 0:
            return self.transform.radial.zeros()
        grid = trajectory.time_grid.restricted(trajectory.time_grid.nodes[k])
        integrator = ProductIntegrator(grid, self.propagator.omega)
        forcing = trajectory.forcing_hat()[: k + 1]
        duhamel_hat, _ = integrator.apply(forcing)
        return RadialProfile(self.transform.radial, self.transform.inverse_values(duhamel_hat[-1]))

    def choose_epsilon(self, shape: WaveState, ps: ParameterSet, time_grid: TimeGrid, k_max: int = 20,
                       trial_iterations: int = 4) -> Tuple[float, WaveState, ContractionDiagnostics]:
        """Largest 2^-k for which the measured L stays below one half."""
        base = self.linear_norm(shape, ps, time_grid)
        if not base > 0.0:
            raise ResolutionError("data shape has zero linear-flow norm")
        for k in range(k_max + 1):
            epsilon = 2.0 ** -k
            data = shape.scaled(epsilon / base)
            try:
                _, diagnostics = self.solve_global(data, ps, time_grid, max_iter=trial_iterations, tol=0.0)
            except DivergenceError:
                continue
            if diagnostics.L < EPSILON_TARGET_L:
                logger.info("epsilon=2^-%d gives L=%.4g", k, diagnostics.L)
                return epsilon, data, diagnostics
        raise ResolutionError(f"no epsilon >= 2^-{k_max} reached L < {EPSILON_TARGET_L}")


def local_weighted_sup(solution: Union[LocalSolution, TrajectorySolution], beta: float, d: float) -> float:
    """sup over the local grid of |t|^β ‖u(t)‖_{(b+1,d)}, both half lines for a LocalSolution."""
    if isinstance(solution, LocalSolution):
        return max(local_weighted_sup(half, beta, d) for half in solution.halves)
    norms = solution.norms(LorentzExponents(solution.nonlinearity.b + 1.0, d))
    return local_weight(beta, solution.time_grid.evaluation_nodes)(norms[1:])


def solve_global(data: WaveState, nl: Nonlinearity, ps: ParameterSet, propagator: KleinGordonPropagator,
                 time_grid: TimeGrid, max_iter: int = 50, tol: float = 1e-8,
                 regularity: Iterable[Tuple[float, float]] = ()) -> Tuple[TrajectorySolution, ContractionDiagnostics]:
    return PicardSolver(propagator, nl).solve_global(data, ps, time_grid, max_iter, tol, regularity)


def solve_local(data: WaveState, nl: Nonlinearity, propagator: KleinGordonPropagator, T: float,
                tol: float = 1e-8, max_iter: int = 50) -> LocalSolution:
    return PicardSolver(propagator, nl).solve_local(data, T, tol, max_iter)


def duhamel(trajectory: TrajectorySolution, t: float) -> RadialProfile:
    return PicardSolver(trajectory.propagator, trajectory.nonlinearity).duhamel(trajectory, t)


def residual(trajectory: TrajectorySolution, d: Optional[float] = None, level: int = 1) -> float:
    return PicardSolver(trajectory.propagator, trajectory.nonlinearity).residual(trajectory, d, level)
