"""
Subcommand handlers. Each takes the run context and the report builder,
writes its CSVs and returns the RunOutcome whose checks decide the exit code.
"""
import logging
import math
from typing import Callable, Dict, List

import numpy as np

from cli.dependencies import RunContext
from cli.report_builder import ReportBuilder, RunOutcome
from cli.schemas import SolveMode, Subcommand
from cli.suites import run_selftest
from core.estimates.dispersive import REFINEMENT_TOLERANCE, dispersive_ratio, envelope_dominates, refinement_change
from core.estimates.weighted_norms import data_norm
from core.params.envelope import beta_identity_constant, beta_identity_quadrature, find_t0
from core.params.parameter_set import (
    IDENTITY_TOLERANCE,
    admissible_range,
    beta_of,
    effective_range,
    local_upper_bound,
    sharp_lower_bound,
)
from core.propagator.wave_group import WaveState
from core.scattering.asymptotics import CONSISTENCY_TOLERANCE, asymptotic_data, defect_trace
from core.scattering.decay_fit import (
    decay_rate_fit,
    default_window,
    is_decreasing,
    little_o_trend,
    scattering_target,
)
from core.scattering.stability import compare_trajectories, stability_experiment
from core.solver.data import gaussian_bump
from core.solver.picard import local_weighted_sup

logger = logging.getLogger(__name__)

BETA_IDENTITY_TIMES = (0.5, 1.0, 2.0)
BETA_SPREAD_TOLERANCE = 1e-3
BETA_MATCH_TOLERANCE = 1e-6
ENVELOPE_SAMPLES = 1000
RESIDUAL_FACTOR = 10.0
SYMMETRY_TOLERANCE = 1e-12

Handler = Callable[[RunContext, ReportBuilder], RunOutcome]


def _label(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


def _envelope_samples(ctx: RunContext, t0: float) -> np.ndarray:
    rng = np.random.default_rng(ctx.config.seed)
    half = ENVELOPE_SAMPLES // 2
    return np.concatenate([rng.uniform(1e-4, t0, half), rng.uniform(t0, 50.0, ENVELOPE_SAMPLES - half)])


def _check_envelope(ctx: RunContext, outcome: RunOutcome, p: float):
    fit = find_t0(p, ctx.config.n, ctx.config.t0)
    dominated = envelope_dominates(p, ctx.config.n, fit, _envelope_samples(ctx, fit.t0))
    outcome.add("envelope_dominates", fit.C, math.inf, dominated, f"t0={fit.t0:g}, {ENVELOPE_SAMPLES} samples")
    outcome.metrics["envelope_C"] = fit.C


def handle_params(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    cfg = ctx.config
    outcome = RunOutcome(Subcommand.PARAMS.value)
    ps = ctx.params
    builder.write_table("params.csv", ps.as_table())

    residuals = ps.residuals()
    builder.write_table("residuals.csv", residuals.items(), ("identity", "residual"))
    outcome.add("identity_residuals", ps.max_residual(), IDENTITY_TOLERANCE, ps.max_residual() <= IDENTITY_TOLERANCE)

    published = admissible_range(cfg.n, cfg.sigma)
    effective = effective_range(cfg.n, cfg.sigma)
    builder.write_table("intervals.csv", [
        ("published_low", published.low),
        ("published_high", published.high),
        ("sharp_low", sharp_lower_bound(cfg.n, cfg.sigma)),
        ("effective_low", effective.low),
        ("effective_high", effective.high),
        ("local_high", local_upper_bound(cfg.n)),
    ])
    if not effective.contains(ps.b):
        outcome.notes.append(f"b={ps.b:g} lies outside the effective interval ({effective.low:.6g}, {effective.high:.6g})")

    gamma = ps.b_alpha_tilde
    constant = beta_identity_constant(ps.beta, gamma)
    scaled = [beta_identity_quadrature(ps.beta, gamma, t) / t ** (-ps.alpha_tilde) for t in BETA_IDENTITY_TIMES]
    builder.write_csv(
        "beta_identity.csv",
        [{"t": t, "quadrature_over_power": q, "beta_function": constant} for t, q in zip(BETA_IDENTITY_TIMES, scaled)],
        ["t", "quadrature_over_power", "beta_function"],
    )
    spread = (max(scaled) - min(scaled)) / abs(float(np.mean(scaled)))
    match = max(abs(q - constant) for q in scaled) / constant
    outcome.add("beta_identity_spread", spread, BETA_SPREAD_TOLERANCE, spread <= BETA_SPREAD_TOLERANCE)
    outcome.add("beta_identity_match", match, BETA_MATCH_TOLERANCE, match <= BETA_MATCH_TOLERANCE)

    _check_envelope(ctx, outcome, ps.p)
    outcome.metrics.update({"beta": ps.beta, "alpha": ps.alpha, "alpha_tilde": ps.alpha_tilde,
                            "b_alpha": ps.b_alpha, "h_max": ps.h_max})
    return outcome


def handle_selftest(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    outcome = RunOutcome(Subcommand.SELFTEST.value)
    outcome.checks.extend(run_selftest(ctx, ctx.config.threads))
    outcome.metrics["transform_constant"] = ctx.transform.constant
    outcome.metrics["n_r"] = ctx.radial.num_points
    outcome.metrics["n_lambda"] = ctx.spectral.num_points
    return outcome


def handle_dispersive(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    cfg = ctx.config
    outcome = RunOutcome(Subcommand.DISPERSIVE.value)
    p = ctx.params.p
    fine = ctx.refined()
    times = np.geomspace(cfg.dispersive_t_min, cfg.dispersive_t_max, cfg.dispersive_samples)
    fine_times = np.geomspace(cfg.dispersive_t_min, cfg.dispersive_t_max, 2 * cfg.dispersive_samples)
    g = gaussian_bump(ctx.radial, cfg.bump_width)
    g_fine = gaussian_bump(fine.radial, cfg.bump_width)

    for r in cfg.sweep_r():
        tag = _label(r)
        report = dispersive_ratio(g, p, r, ctx.propagator, times, cfg.spectral_floor)
        builder.write_csv(f"dispersive_r{tag}.csv", report.rows(), ["t", "w_norm", "wdot_over_d_norm", "phi", "ratio"])
        outcome.add(f"ratio_finite_r{tag}", report.sup_ratio, math.inf, report.finite)

        mirrored = dispersive_ratio(g, p, r, ctx.propagator, -times, cfg.spectral_floor)
        asymmetry = float(np.max(np.abs(mirrored.ratios - report.ratios))) / report.sup_ratio
        outcome.add(f"time_symmetry_r{tag}", asymmetry, SYMMETRY_TOLERANCE, asymmetry <= SYMMETRY_TOLERANCE)

        refined = dispersive_ratio(g_fine, p, r, fine.propagator, fine_times, cfg.spectral_floor)
        change = refinement_change(report, refined)
        outcome.add(f"refinement_change_r{tag}", change, REFINEMENT_TOLERANCE, change <= REFINEMENT_TOLERANCE,
                    f"sup {report.sup_ratio:.6g} -> {refined.sup_ratio:.6g}")
        if report.wdot_skipped:
            outcome.notes.append(f"r={tag}: cos(tD)/D term skipped at the zero frequency")

    _check_envelope(ctx, outcome, p)
    return outcome


def _write_regularity(builder: ReportBuilder, diagnostics):
    rows = [
        {"d": d, "h": h, "gamma_1": trace.gammas[0], "gamma_max": max(trace.gammas), "K": trace.K, "L": trace.L,
         "bound": trace.bound, "holds": trace.holds}
        for (d, h), trace in diagnostics.regularity.items()
    ]
    builder.write_csv("regularity.csv", rows, ["d", "h", "gamma_1", "gamma_max", "K", "L", "bound", "holds"])


def _solve_global(ctx: RunContext, builder: ReportBuilder, outcome: RunOutcome):
    cfg = ctx.config
    ps = ctx.params
    epsilon, data = ctx.scaled_data()
    regularity = [(d, h) for d in cfg.sweep_d() for h in (0.0, ps.h_max / 2.0)]
    trajectory, diagnostics = ctx.solver.solve_global(data, ps, ctx.time_grid, cfg.max_iter, cfg.tol, regularity)

    builder.write_csv("iterations.csv", diagnostics.rows())
    builder.write_csv("solution.csv", trajectory.rows(ps.p), ["t", "norm_inf", "norm_d"])
    _write_regularity(builder, diagnostics)

    outcome.add("converged", trajectory.iterations, cfg.max_iter, trajectory.converged)
    worst_ratio = max(diagnostics.ratios, default=0.0)
    outcome.add("ratios_bounded", worst_ratio, diagnostics.L, diagnostics.ratios_bounded)
    outcome.add("within_ball", diagnostics.solution_norm, 2.0 * diagnostics.epsilon, diagnostics.within_ball)
    residual = ctx.solver.residual(trajectory)
    outcome.add("residual", residual, RESIDUAL_FACTOR * cfg.tol, residual <= RESIDUAL_FACTOR * cfg.tol)
    for (d, h), trace in diagnostics.regularity.items():
        outcome.add(f"regularity_d{_label(d)}_h{h:.6g}", max(trace.gammas), trace.bound, trace.holds)

    outcome.metrics.update({
        "epsilon": epsilon,
        "K": diagnostics.K_measured,
        "L": diagnostics.L,
        "data_norm": data_norm(data, ps, ctx.propagator, ctx.time_grid),
        "solution_norm": diagnostics.solution_norm,
    })


def _solve_local(ctx: RunContext, builder: ReportBuilder, outcome: RunOutcome):
    cfg = ctx.config
    data = ctx.bump()
    solution = ctx.solver.solve_local(data, cfg.local_T, cfg.tol, cfg.max_iter, d=cfg.d, points=cfg.core_points)
    # the global admissible range does not bind here, so no ParameterSet
    beta = beta_of(cfg.n, cfg.b)
    rows = [{"d": d, "weighted_sup": local_weighted_sup(solution, beta, d)} for d in cfg.sweep_d()]
    builder.write_csv("local.csv", rows, ["d", "weighted_sup"])
    builder.write_csv("solution.csv", solution.rows(cfg.b + 1.0), ["t", "norm_inf", "norm_d"])

    outcome.add("converged", solution.iterations, cfg.max_iter, solution.converged)
    for row in rows:
        value = row["weighted_sup"]
        outcome.add(f"local_sup_finite_d{_label(row['d'])}", value, math.inf, math.isfinite(value))
    residual = max(ctx.solver.residual(half) for half in solution.halves)
    outcome.add("residual", residual, RESIDUAL_FACTOR * cfg.tol, residual <= RESIDUAL_FACTOR * cfg.tol)
    outcome.metrics["T"] = solution.T


def handle_solve(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    outcome = RunOutcome(Subcommand.SOLVE.value)
    if ctx.config.mode == SolveMode.LOCAL.value:
        _solve_local(ctx, builder, outcome)
    else:
        _solve_global(ctx, builder, outcome)
    return outcome


def _write_state(builder: ReportBuilder, name: str, state: WaveState):
    rows = [{"r": r, "u0": a, "u1": b} for r, a, b in zip(state.u.grid.nodes, state.u.values, state.ut.values)]
    builder.write_csv(name, rows, ["r", "u0", "u1"])


def handle_scatter(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    cfg = ctx.config
    outcome = RunOutcome(Subcommand.SCATTER.value)
    ps = ctx.params
    epsilon, data = ctx.scaled_data()
    window = default_window(ps, ctx.time_grid.t_max)
    h_values = cfg.h_values if cfg.h_values is not None else ps.h_sweep()
    fits: List[Dict] = []

    for direction, side in ((1, "plus"), (-1, "minus")):
        trajectory, _ = ctx.solver.solve_global(
            data, ps, ctx.time_grid, cfg.max_iter, cfg.tol, direction=direction,
        )
        outcome.add(f"converged_{side}", trajectory.iterations, cfg.max_iter, trajectory.converged)
        asym = asymptotic_data(trajectory, ps, cfg.horizon_tol)
        _write_state(builder, f"asymptotic_{side}.csv", asym.state)
        outcome.metrics[f"truncation_bound_{side}"] = asym.truncation_bound
        outcome.metrics[f"data_norm_{side}"] = data_norm(asym.state, ps, ctx.propagator, ctx.time_grid)

        for h in h_values:
            trace = defect_trace(asym, ps, h=h)
            builder.write_csv(f"defect_{side}_h{h:.6g}.csv", trace.rows(),
                              ["t", "defect", "weighted_defect", "linear_trace", "tail_defect"])
            fit = decay_rate_fit(trace.times, trace.direct, scattering_target(ps, h), window)
            fits.append({"direction": side, "h": h, **fit.to_dict()})
            outcome.add(f"decay_rate_{side}_h{h:.6g}", fit.slope, fit.target, fit.passed,
                        "floor reached" if fit.floor_reached else "")
            outcome.add(f"defect_consistency_{side}_h{h:.6g}", trace.consistency, CONSISTENCY_TOLERANCE,
                        trace.consistency <= CONSISTENCY_TOLERANCE)
            mask = (trace.times >= window[0]) & (trace.times <= window[1])
            if is_decreasing(trace.times[mask], trace.linear_trace[mask]):
                trend = little_o_trend(trace.times, trace.direct, trace.rate, window)
                outcome.add(f"little_o_{side}_h{h:.6g}", trace.rate, trace.rate, trend)
            else:
                outcome.notes.append(f"{side}, h={h:.6g}: free trace not decreasing, little-o trend not asserted")

    builder.write_csv("decay_fits.csv", fits)
    outcome.metrics["epsilon"] = epsilon
    return outcome


def handle_stability(ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    cfg = ctx.config
    outcome = RunOutcome(Subcommand.STABILITY.value)
    ps = ctx.params
    data_a, data_b = ctx.paired_data()
    report = stability_experiment(
        data_a, data_b, ctx.solver, ps, ctx.time_grid, h=cfg.h, d=cfg.d,
        max_iter=cfg.max_iter, tol=cfg.tol, threads=cfg.threads,
    )
    builder.write_csv("stability.csv", report.rows(), ["t", "linear_trace", "solution_trace", "duhamel_trace"])

    for side, diagnostics in zip(("a", "b"), report.diagnostics):
        outcome.add(f"within_ball_{side}", diagnostics.solution_norm, 2.0 * diagnostics.epsilon,
                    diagnostics.within_ball)
    outcome.add("linear_trace_decreasing", report.linear_trace[-1], report.linear_trace[0], report.linear_decreasing)
    outcome.add("solution_trace_decreasing", report.solution_trace[-1], report.solution_trace[0],
                report.solution_decreasing)
    outcome.add("forward_implication", float(report.forward_implication), 1.0, report.forward_implication)
    outcome.add("quasi_triangle_audit", report.audit_constant, report.audit_constant, report.audit_holds)

    trajectory_a = report.trajectories[0]
    same = compare_trajectories(trajectory_a, trajectory_a, ps, cfg.h, report.d)
    outcome.add("identical_data_zero", float(np.max(same.solution_trace)), 0.0, same.identical)
    outcome.metrics["difference_amplitude"] = cfg.difference_amplitude
    return outcome


HANDLERS: Dict[str, Handler] = {
    Subcommand.PARAMS.value: handle_params,
    Subcommand.SELFTEST.value: handle_selftest,
    Subcommand.DISPERSIVE.value: handle_dispersive,
    Subcommand.SOLVE.value: handle_solve,
    Subcommand.SCATTER.value: handle_scatter,
    Subcommand.STABILITY.value: handle_stability,
}


def dispatch(subcommand: str, ctx: RunContext, builder: ReportBuilder) -> RunOutcome:
    """Validate, run the handler and dump the kernel table when asked."""
    ctx.config.check(subcommand)
    outcome = HANDLERS[subcommand](ctx, builder)
    if ctx.config.dump_kernel and subcommand != Subcommand.PARAMS.value:
        path = ctx.transform.dump_kernel_table(builder.out_dir / "kernel_table.csv")
        builder.register(path, "csv")
    logger.info("%s finished: %s", subcommand, "pass" if outcome.passed else "FAIL")
    return outcome
