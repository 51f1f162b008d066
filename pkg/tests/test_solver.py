import math

import numpy as np
import pytest

from core.errors import (
    ConstraintViolationError,
    DiscretizationError,
    InterpolationRequiredError,
    PreconditionError,
    SingularMultiplierError,
)
from core.solver.data import bump_data, gaussian_bump
from core.solver.duhamel import ProductIntegrator, filon_moments, singular_moment
from core.solver.nonlinearity import Nonlinearity, evaluate_F
from core.solver.picard import PicardSolver, local_weighted_sup
from core.solver.time_grid import TimeGrid

OMEGA = np.array([0.7, 3.1, 5.3])


class TestTimeGrid:
    @pytest.fixture(autouse=True)
    def setup(self, time_grid3):
        self.grid = time_grid3

    def test_graded_layout(self):
        assert self.grid.nodes[0] == 0.0
        assert self.grid.nodes[1] == pytest.approx(1e-2)
        assert self.grid.t_max == 6.0
        assert len(self.grid) == 1 + 12 + 51

    def test_index_of_node(self):
        assert self.grid.index_of(1.0) == 13

    def test_index_of_rejects_off_grid(self):
        with pytest.raises(InterpolationRequiredError):
            self.grid.index_of(1.05)

    def test_refined_inserts_midpoints(self):
        fine = self.grid.refined()
        assert len(fine) == 2 * len(self.grid) - 1
        assert fine.level == 1
        assert np.array_equal(fine.nodes[::2], self.grid.nodes)

    def test_restricted_prefix(self):
        prefix = self.grid.restricted(1.0)
        assert prefix.t_max == 1.0
        assert len(prefix) == 14

    def test_must_start_at_zero(self):
        with pytest.raises(DiscretizationError):
            TimeGrid(np.array([0.1, 0.2]))


class TestNonlinearity:
    def test_odd(self):
        values = np.array([-2.0, -0.5, 0.0, 0.3, 1.5])
        nl = Nonlinearity(2.7)
        assert np.allclose(nl.evaluate(-values), -nl.evaluate(values))

    def test_power(self):
        assert Nonlinearity(2.7, mu=0.5, sign=-1).evaluate(np.array([2.0]))[0] == pytest.approx(-0.5 * 2.0 ** 2.7)

    def test_power_must_exceed_one(self):
        with pytest.raises(PreconditionError):
            Nonlinearity(1.0)

    def test_zero_coupling(self):
        assert np.array_equal(Nonlinearity(2.7, mu=0.0).evaluate(np.array([1.0, -3.0])), np.zeros(2))

    def test_evaluate_on_profile(self, radial3):
        u = radial3.sample(lambda r: np.exp(-r))
        out = evaluate_F(u, Nonlinearity(2.0))
        assert out.grid == radial3
        assert np.allclose(out.values, np.exp(-2.0 * radial3.nodes))


class TestProductIntegrator:
    def test_constant_forcing_is_exact(self):
        grid = TimeGrid.uniform(5.0, 50)
        integrator = ProductIntegrator(grid, OMEGA)
        u, ut = integrator.apply(np.ones((len(grid), OMEGA.size)))
        t = grid.nodes[:, None]
        assert np.allclose(u, (1.0 - np.cos(t * OMEGA)) / OMEGA ** 2, atol=1e-11)
        assert np.allclose(ut, np.sin(t * OMEGA) / OMEGA, atol=1e-11)

    def test_second_order_for_smooth_forcing(self):
        kappa = 2.0
        errors = []
        for intervals in (100, 200):
            grid = TimeGrid.uniform(5.0, intervals)
            t = grid.nodes[:, None]
            forcing = np.cos(kappa * t) * np.ones(OMEGA.size)
            u, _ = ProductIntegrator(grid, OMEGA).apply(forcing)
            exact = (np.cos(kappa * t) - np.cos(OMEGA * t)) / (OMEGA ** 2 - kappa ** 2)
            errors.append(np.max(np.abs(u - exact)))
        order = math.log2(errors[0] / errors[1])
        assert 1.8 <= order <= 2.2

    def test_moments_series_switch(self):
        theta = np.array([0.4999, 0.5001])
        i0, i1 = filon_moments(theta)
        exact0 = (np.exp(1j * theta) - 1.0) / (1j * theta)
        assert np.allclose(i0, exact0, rtol=1e-13)
        assert np.allclose(i1, np.exp(1j * theta) / (1j * theta) + (np.exp(1j * theta) - 1.0) / theta ** 2, rtol=1e-12)

    def test_singular_moment_without_singularity(self):
        theta = np.array([0.0, 0.3, 2.0, 5.0])
        i0, _ = filon_moments(theta)
        assert np.allclose(singular_moment(theta, 0.0), i0, rtol=1e-12)

    def test_oracle_matches_filon_weights(self):
        grid = TimeGrid.uniform(5.0, 50)
        exact = ProductIntegrator(grid, OMEGA)
        oracle = ProductIntegrator(grid, OMEGA, exact=False)
        assert np.allclose(exact.left, oracle.left, rtol=1e-10, atol=1e-14)
        assert np.allclose(exact.right, oracle.right, rtol=1e-10, atol=1e-14)

    def test_singular_first_panel_matches_gauss_jacobi(self):
        grid = TimeGrid.geometric(1.0, 20).with_endpoint_exponent(0.3)
        exact = ProductIntegrator(grid, OMEGA)
        oracle = ProductIntegrator(grid, OMEGA, exact=False)
        assert np.allclose(exact.right[0], oracle.right[0], rtol=1e-10)
        assert np.all(exact.left[0] == 0.0)

    def test_rejects_zero_frequency(self):
        with pytest.raises(SingularMultiplierError):
            ProductIntegrator(TimeGrid.uniform(1.0, 10), np.array([0.0, 1.0]))


class TestGlobalSolve:
    @pytest.fixture(autouse=True)
    def setup(self, solver3, small_data, params3, time_grid3):
        self.solver = solver3
        self.params = params3
        self.grid = time_grid3
        self.trajectory, self.diagnostics = solver3.solve_global(small_data, params3, time_grid3, tol=1e-8)

    def test_converges_inside_ball(self):
        assert self.trajectory.converged
        assert self.diagnostics.ratios_bounded
        assert self.diagnostics.within_ball
        assert self.diagnostics.epsilon == pytest.approx(1e-2, rel=1e-10)
        assert self.diagnostics.L < 1.0

    def test_first_panel_uses_singular_rule(self):
        grid = self.trajectory.time_grid
        assert np.array_equal(grid.nodes, self.grid.nodes)
        assert grid.endpoint_exponent == pytest.approx(self.params.b_alpha_tilde)
        omega = self.solver.propagator.omega
        integrator = ProductIntegrator(grid, omega)
        h = grid.nodes[1]
        assert integrator.singular
        assert np.all(integrator.left[0] == 0.0)
        assert np.allclose(integrator.right[0], h * singular_moment(h * omega, self.params.b_alpha_tilde), rtol=1e-14)

    def test_ratios_within_measured_constant(self):
        assert all(r <= self.diagnostics.L * (1.0 + 1e-12) for r in self.diagnostics.ratios)

    def test_residual_against_oracle(self):
        assert self.solver.residual(self.trajectory) <= 1e-7

    def test_duhamel_at_initial_time_is_zero(self):
        assert np.all(self.solver.duhamel(self.trajectory, 0.0).values == 0.0)

    def test_duhamel_off_grid_rejected(self):
        with pytest.raises(InterpolationRequiredError):
            self.solver.duhamel(self.trajectory, 1.05)

    def test_duhamel_matches_solution_minus_free_part(self):
        k = self.grid.index_of(2.0)
        v1_hat, _ = self.trajectory.linear_hat()
        free = self.solver.transform.inverse_values(v1_hat[k])
        nonlinear = self.trajectory.values()[k] - free
        assert np.max(np.abs(self.solver.duhamel(self.trajectory, 2.0).values - nonlinear)) <= 1e-8

    def test_regularity_traces(self, small_data):
        trajectory, diagnostics = self.solver.solve_global(
            small_data, self.params, self.grid, tol=1e-8, regularity=[(2.0, 0.0), (math.inf, self.params.h_max / 4.0)]
        )
        assert set(diagnostics.regularity) == {(2.0, 0.0), (math.inf, self.params.h_max / 4.0)}
        for trace in diagnostics.regularity.values():
            assert len(trace.gammas) == trajectory.iterations + 1
            assert trace.holds

    def test_iteration_rows(self):
        rows = self.diagnostics.rows()
        assert len(rows) == self.trajectory.iterations
        assert math.isnan(rows[0]["ratio"])

    def test_power_mismatch_rejected(self, propagator3, small_data):
        with pytest.raises(ConstraintViolationError):
            PicardSolver(propagator3, Nonlinearity(2.5)).solve_global(small_data, self.params, self.grid)


class TestLinearLimit:
    def test_zero_coupling_reproduces_free_flow(self, propagator3, small_data, params3, time_grid3):
        solver = PicardSolver(propagator3, Nonlinearity(2.7, mu=0.0))
        trajectory, diagnostics = solver.solve_global(small_data, params3, time_grid3)
        v1_hat, _ = trajectory.linear_hat()
        assert trajectory.converged
        assert trajectory.iterations == 1
        assert np.array_equal(trajectory.u_hat, v1_hat)
        assert diagnostics.L == 0.0


class TestLocalSolve:
    def test_power_above_local_range_rejected(self, solver3, radial3):
        with pytest.raises(ConstraintViolationError) as exc:
            solver3.solve_local(bump_data(radial3, 1.0), T=0.5)
        assert exc.value.offenders == ["b"]

    def test_contracts_for_large_data(self, propagator3, radial3):
        solver = PicardSolver(propagator3, Nonlinearity(2.0))
        solution = solver.solve_local(bump_data(radial3, 1.0), T=0.5, tol=1e-10)
        assert solution.converged
        assert solution.T <= 0.5
        assert solution.backward.direction == -1
        beta = (3 - 1) / 2.0 * (1.0 - 2.0 / 3.0)
        assert math.isfinite(local_weighted_sup(solution, beta, math.inf))
        assert solution.forward.time_grid.endpoint_exponent == pytest.approx(2.0 * beta)

    def test_negative_half_is_time_reversed_forward_half(self, propagator3, radial3):
        solver = PicardSolver(propagator3, Nonlinearity(2.0, mu=0.0))
        solution = solver.solve_local(bump_data(radial3, 1.0), T=0.5)
        forward, backward = solution.halves
        assert solution.T == 0.5
        assert np.array_equal(backward.times, -forward.times)
        # (0, u1) data: u(-t) = -u(t)
        scale = np.max(np.abs(forward.values()))
        assert np.allclose(backward.values(), -forward.values(), rtol=0.0, atol=1e-13 * scale)

    def test_rows_cover_both_half_lines(self, propagator3, radial3):
        solver = PicardSolver(propagator3, Nonlinearity(2.0, mu=0.0))
        solution = solver.solve_local(bump_data(radial3, 1.0), T=0.5)
        times = [row["t"] for row in solution.rows(3.0)]
        assert times[0] == -0.5 and times[-1] == 0.5
        assert times.count(0.0) == 1
        assert np.all(np.diff(times) > 0.0)


class TestData:
    def test_bump_must_fit(self, radial3):
        with pytest.raises(PreconditionError):
            gaussian_bump(radial3, width=3.0)

    def test_bump_data_has_zero_position(self, radial3):
        data = bump_data(radial3, 1.0)
        assert np.all(data.u.values == 0.0)
        assert data.ut.values[0] == pytest.approx(1.0, abs=1e-4)
