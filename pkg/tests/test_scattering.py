import math

import numpy as np
import pytest

from core.errors import PreconditionError
from core.scattering.asymptotics import CONSISTENCY_TOLERANCE, asymptotic_data, defect_trace, scattering_defect
from core.scattering.decay_fit import (
    decay_rate_fit,
    default_window,
    is_decreasing,
    little_o_trend,
    scattering_target,
)
from core.scattering.stability import compare_trajectories, quasi_triangle_constant, stability_experiment
from core.solver.nonlinearity import Nonlinearity
from core.solver.picard import PicardSolver

TIMES = np.linspace(3.0, 5.0, 21)


class TestDecayFit:
    def test_fast_decay_passes(self):
        fit = decay_rate_fit(TIMES, np.exp(-1.2 * TIMES), target=-1.0)
        assert fit.slope == pytest.approx(-1.2, abs=1e-10)
        assert fit.passed

    def test_slow_decay_fails(self):
        fit = decay_rate_fit(TIMES, 3.0 * np.exp(-0.5 * TIMES), target=-1.0)
        assert not fit.passed

    def test_slack(self):
        assert decay_rate_fit(TIMES, np.exp(-0.97 * TIMES), target=-1.0).passed

    def test_numerical_floor_passes(self):
        fit = decay_rate_fit(TIMES, np.zeros_like(TIMES), target=-1.0)
        assert fit.floor_reached
        assert fit.passed
        assert math.isnan(fit.slope)

    def test_window_needs_samples(self):
        with pytest.raises(PreconditionError):
            decay_rate_fit(TIMES, np.exp(-TIMES), target=-1.0, window=(3.0, 3.2))

    def test_window_must_be_ordered(self):
        with pytest.raises(PreconditionError):
            decay_rate_fit(TIMES, np.exp(-TIMES), target=-1.0, window=(4.0, 4.0))

    def test_target_and_window(self, params3):
        assert scattering_target(params3) == -params3.b_alpha
        assert scattering_target(params3, 0.1) == pytest.approx(-params3.b_alpha - 0.1)
        assert default_window(params3, 8.0) == (3.0, 7.0)


class TestTrends:
    def test_is_decreasing(self):
        assert is_decreasing(TIMES, np.exp(-TIMES))
        assert not is_decreasing(TIMES, np.exp(TIMES))
        assert is_decreasing(TIMES, np.zeros_like(TIMES))

    def test_little_o(self):
        assert little_o_trend(TIMES, np.exp(-1.5 * TIMES), 1.0, (3.0, 5.0))
        assert not little_o_trend(TIMES, np.exp(-0.5 * TIMES), 1.0, (3.0, 5.0))

    def test_quasi_triangle_constant(self):
        assert quasi_triangle_constant(2.0) == pytest.approx(math.sqrt(2.0))
        assert quasi_triangle_constant(math.inf) == 1.0


class TestAsymptoticData:
    @pytest.fixture(autouse=True)
    def setup(self, solver3, small_data, params3, time_grid3):
        self.solver = solver3
        self.data = small_data
        self.params = params3
        self.grid = time_grid3
        self.forward, _ = solver3.solve_global(small_data, params3, time_grid3, tol=1e-12)

    def test_free_equation_keeps_its_data(self, propagator3):
        solver = PicardSolver(propagator3, Nonlinearity(2.7, mu=0.0))
        trajectory, _ = solver.solve_global(self.data, self.params, self.grid)
        asym = asymptotic_data(trajectory, self.params)
        assert asym.truncation_bound == 0.0
        scale = self.data.ut.sup_norm()
        assert np.max(np.abs(asym.state.u.values)) <= 1e-6 * scale
        assert np.max(np.abs(asym.state.ut.values - self.data.ut.values)) <= 1e-6 * scale

    def test_backward_data_by_odd_symmetry(self):
        # (0, u1) data: the backward solution is minus the forward one
        backward, _ = self.solver.solve_global(self.data, self.params, self.grid, tol=1e-12, direction=-1)
        plus = asymptotic_data(self.forward, self.params, check_horizon=False)
        minus = asymptotic_data(backward, self.params, check_horizon=False)
        assert minus.direction == -1
        scale = np.max(np.abs(plus.state.ut.values))
        assert np.allclose(minus.state.u.values, -plus.state.u.values, rtol=0.0, atol=1e-14 * scale)
        assert np.allclose(minus.state.ut.values, plus.state.ut.values, rtol=0.0, atol=1e-14 * scale)

    def test_defect_formulas_agree(self):
        asym = asymptotic_data(self.forward, self.params, check_horizon=False)
        trace = defect_trace(asym, self.params)
        assert trace.times[0] >= self.params.t0
        assert trace.consistency <= CONSISTENCY_TOLERANCE
        assert trace.direct[-1] <= 1e-4 * trace.direct[0]

    def test_defect_decays_at_scattering_rate(self):
        trace = defect_trace(asymptotic_data(self.forward, self.params, check_horizon=False), self.params)
        window = default_window(self.params, self.grid.t_max)
        fit = decay_rate_fit(trace.times, trace.direct, scattering_target(self.params), window)
        assert fit.samples >= 3
        assert fit.passed

    def test_pointwise_defect_matches_trace(self):
        asym = asymptotic_data(self.forward, self.params, check_horizon=False)
        trace = defect_trace(asym, self.params)
        k = int(np.argmin(np.abs(trace.times - 2.0)))
        assert scattering_defect(asym, self.params, 2.0) == pytest.approx(trace.direct[k], rel=1e-8)

    def test_defect_before_t0_rejected(self):
        asym = asymptotic_data(self.forward, self.params, check_horizon=False)
        with pytest.raises(PreconditionError):
            scattering_defect(asym, self.params, 0.5)

    def test_short_trajectory_rejected(self):
        short, _ = self.solver.solve_global(self.data, self.params, self.grid.restricted(self.grid.nodes[5]))
        with pytest.raises(PreconditionError):
            asymptotic_data(short, self.params)


class TestStability:
    @pytest.fixture(autouse=True)
    def setup(self, solver3, small_data, params3, time_grid3):
        self.solver = solver3
        self.data = small_data
        self.params = params3
        self.grid = time_grid3

    def test_identical_data_give_zero_traces(self):
        trajectory, _ = self.solver.solve_global(self.data, self.params, self.grid)
        report = compare_trajectories(trajectory, trajectory, self.params, 0.0, math.inf)
        assert report.identical
        assert report.audit_holds

    def test_paired_solves(self):
        report = stability_experiment(
            self.data, self.data.scaled(1.1), self.solver, self.params, self.grid, tol=1e-12, threads=2,
        )
        assert report.audit_holds
        assert report.forward_implication
        assert report.linear_decreasing
        assert report.solution_decreasing
        assert np.all(report.times >= self.params.t0)
        assert report.audit_constant == pytest.approx(2.0 ** (1.0 / 3.7))
        traj_a, traj_b = report.trajectories
        assert traj_a.converged and traj_b.converged
        assert len(report.rows()) == report.times.size
