"""
Self-test suite: transform, propagator and Lorentz invariants at the
configured grids. Each check is independent and returns CheckResults.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List

import numpy as np

from cli.dependencies import RunContext
from cli.report_builder import CheckResult
from core.geometry.grid import RadialGrid, indicator_ball
from core.geometry.laplacian import apply_radial_laplacian
from core.geometry.space import HyperbolicSpace, ball_volume, spherical_function
from core.lorentz.checks import holder_check, inclusion_check
from core.lorentz.norms import lorentz_norm
from core.lorentz.rearrangement import LorentzExponents, decreasing_rearrangement
from core.params.envelope import find_t0
from core.estimates.dispersive import envelope_dominates
from core.propagator.wave_group import KleinGordonPropagator, MassParameter

logger = logging.getLogger(__name__)

ROUND_TRIP_TOLERANCE = 1e-6
PLANCHEREL_TOLERANCE = 1e-6
ENERGY_TOLERANCE = 1e-8
GROUP_TOLERANCE = 1e-6
NORM_TOLERANCE = 1e-6
LP_TOLERANCE = 1e-4
ORDER_RANGE = (1.8, 2.2)
TEST_WIDTHS = (0.6, 0.8, 1.0, 1.2, 1.5)

Check = Callable[[RunContext], List[CheckResult]]


def _gaussian(ctx: RunContext, width: float):
    return ctx.radial.sample(lambda r: np.exp(-(r / width) ** 2))


def check_volume(ctx: RunContext) -> List[CheckResult]:
    error = ctx.radial.volume_error()
    return [CheckResult("radial_volume", error, 1e-10, error <= 1e-10)]


def check_round_trip(ctx: RunContext) -> List[CheckResult]:
    errors = [ctx.transform.round_trip_error(_gaussian(ctx, w)) for w in TEST_WIDTHS]
    worst = max(errors)
    return [CheckResult("transform_round_trip", worst, ROUND_TRIP_TOLERANCE, worst <= ROUND_TRIP_TOLERANCE)]


def check_plancherel(ctx: RunContext) -> List[CheckResult]:
    worst = 0.0
    for w in TEST_WIDTHS:
        physical, spectral = ctx.transform.plancherel(_gaussian(ctx, w))
        worst = max(worst, abs(physical - spectral) / physical)
    return [CheckResult("plancherel", worst, PLANCHEREL_TOLERANCE, worst <= PLANCHEREL_TOLERANCE)]


def check_energy(ctx: RunContext) -> List[CheckResult]:
    results = []
    rho = ctx.space.rho
    data = ctx.bump()
    u0 = ctx.transform.forward(_gaussian(ctx, 1.0)).values
    u1 = ctx.transform.forward(data.ut).values
    times = np.linspace(0.0, 5.0, 11)
    for c in (0.0, -rho * rho):
        propagator = KleinGordonPropagator(ctx.transform, MassParameter(c, ctx.config.n))
        u, ut = propagator.flow_spectral(times, u0, u1)
        energies = np.array([propagator.energy(u[k], ut[k]) for k in range(times.size)])
        drift = float(np.max(np.abs(energies - energies[0])) / energies[0])
        results.append(CheckResult(f"energy_drift_c{c:g}", drift, ENERGY_TOLERANCE, drift <= ENERGY_TOLERANCE))
    return results


def check_group(ctx: RunContext) -> List[CheckResult]:
    """W(t+s) = W(t)W(s) on the spectral side, both components."""
    propagator = ctx.propagator
    data = ctx.bump()
    u0 = ctx.transform.forward(_gaussian(ctx, 1.0)).values
    u1 = ctx.transform.forward(data.ut).values
    mid_u, mid_ut = propagator.flow_spectral(0.3, u0, u1)
    stepped_u, stepped_ut = propagator.flow_spectral(0.7, mid_u, mid_ut)
    direct_u, direct_ut = propagator.flow_spectral(1.0, u0, u1)
    scale = max(np.max(np.abs(direct_u)), np.max(np.abs(direct_ut)))
    defect = float(max(np.max(np.abs(stepped_u - direct_u)), np.max(np.abs(stepped_ut - direct_ut))) / scale)
    return [CheckResult("group_property", defect, GROUP_TOLERANCE, defect <= GROUP_TOLERANCE)]


def check_eigenrelation(ctx: RunContext) -> List[CheckResult]:
    """Second-order convergence of -Δφ_λ = (λ²+ρ²)φ_λ on uniform grids."""
    space = HyperbolicSpace(ctx.config.n)
    results = []
    for lam in (0.5, 1.0, 2.0, 4.0):
        errors = []
        for points in (201, 401):
            grid = RadialGrid.uniform(space, 6.0, points)
            phi = grid.sample(lambda r: spherical_function(ctx.config.n, lam, r))
            residual = -apply_radial_laplacian(phi).values - (lam ** 2 + space.rho ** 2) * phi.values
            window = (grid.nodes >= 0.5) & (grid.nodes <= 5.5)
            errors.append(float(np.max(np.abs(residual[window]))))
        order = math.log2(errors[0] / errors[1])
        passed = ORDER_RANGE[0] <= order <= ORDER_RANGE[1]
        results.append(CheckResult(f"eigenrelation_order_lambda{lam:g}", order, ORDER_RANGE[0], passed))
    return results


def _panel_radius(grid: RadialGrid, panels: int) -> float:
    return panels * grid.r_max / grid.panels


def check_lorentz(ctx: RunContext) -> List[CheckResult]:
    grid = ctx.radial
    R = _panel_radius(grid, max(1, grid.panels // 16))
    ball = indicator_ball(grid, R)
    volume = ball_volume(ctx.config.n, R)
    worst = 0.0
    for p, q in ((3.7, math.inf), (3.7, 2.0), (2.5, 3.7), (1.5, 1.0)):
        expected = volume ** (1.0 / p) if math.isinf(q) else (p / q) ** (1.0 / q) * volume ** (1.0 / p)
        measured = lorentz_norm(ball, LorentzExponents(p, q))
        worst = max(worst, abs(measured - expected) / expected)
    results = [CheckResult("indicator_norms", worst, NORM_TOLERANCE, worst <= NORM_TOLERANCE)]

    lp_gap = 0.0
    for w in TEST_WIDTHS:
        f = _gaussian(ctx, w)
        for p in (1.5, 2.0, 3.7):
            classical = f.lp_norm(p)
            lp_gap = max(lp_gap, abs(lorentz_norm(f, LorentzExponents(p, p)) - classical) / classical)
    results.append(CheckResult("lorentz_equals_lp", lp_gap, LP_TOLERANCE, lp_gap <= LP_TOLERANCE))

    rng = np.random.default_rng(ctx.config.seed)
    monotone = True
    equimeasurable = 0.0
    for _ in range(50):
        f = grid.profile(rng.standard_normal(grid.num_points) * np.exp(-grid.nodes))
        table = decreasing_rearrangement(f)
        monotone &= table.is_nonincreasing()
        height = float(np.median(np.abs(f.values)))
        direct = float(np.sum(grid.weights[np.abs(f.values) > height]))
        equimeasurable = max(equimeasurable, abs(table.distribution(height) - direct) / max(direct, 1e-300))
    results.append(CheckResult("rearrangement_monotone", float(monotone), 1.0, monotone))
    results.append(CheckResult("equimeasurability", equimeasurable, 1e-12, equimeasurable <= 1e-12))

    e1, e2, e3 = LorentzExponents(3.7, 3.7), LorentzExponents(3.7, math.inf), LorentzExponents(1.85, 3.7)
    holder = [holder_check(_gaussian(ctx, a), _gaussian(ctx, b), e1, e2, e3) for a, b in ((0.6, 1.0), (1.2, 0.8))]
    finite = all(report.passed for report in holder)
    results.append(CheckResult("holder_finite", max(r.ratio for r in holder), math.inf, finite))
    inclusions = [inclusion_check(_gaussian(ctx, w), 3.7, 2.0, 6.0) for w in TEST_WIDTHS]
    ordered = all(report.ordering_holds for report in inclusions)
    worst_constant = max(max(report.measured_constants) for report in inclusions)
    results.append(CheckResult("inclusion_ordering", worst_constant, 1.0, ordered))
    return results


def check_envelope(ctx: RunContext) -> List[CheckResult]:
    p = ctx.params.p
    fit = find_t0(p, ctx.config.n, ctx.config.t0)
    rng = np.random.default_rng(ctx.config.seed)
    samples = np.concatenate([rng.uniform(1e-4, fit.t0, 500), rng.uniform(fit.t0, 50.0, 500)])
    dominated = envelope_dominates(p, ctx.config.n, fit, samples)
    return [CheckResult("envelope_dominates", fit.C, math.inf, dominated, f"t0={fit.t0:g}")]


SELFTEST_CHECKS: List[Check] = [
    check_volume,
    check_round_trip,
    check_plancherel,
    check_energy,
    check_group,
    check_eigenrelation,
    check_lorentz,
    check_envelope,
]


def run_selftest(ctx: RunContext, threads: int = 1) -> List[CheckResult]:
    # shared state is built once before fanning out
    _ = ctx.propagator
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        batches = list(pool.map(lambda check: check(ctx), SELFTEST_CHECKS))
    results = [result for batch in batches for result in batch]
    for result in results:
        logger.info("selftest %s: %s (%.6g)", result.name, "pass" if result.passed else "FAIL", result.value)
    return results
