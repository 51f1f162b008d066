"""
Scattering data of a computed global solution.

With M = ∫₀^T e^{iωs} F̂(u(s)) ds over the whole trajectory,

    û0⁺ = û0 - Im(M)/ω,   û1⁺ = û1 + Re(M),

which are the free data whose evolution u⁺ satisfies
u(t) - u⁺(t) = ∫_t^T W(s-t) F(u(s)) ds. Backward runs are reflected runs,
so the "-" data are the reflected "+" data of the reflected trajectory.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from core.errors import HorizonError, PreconditionError, violation
from core.lorentz.norms import lorentz_norms
from core.lorentz.rearrangement import LorentzExponents
from core.params.parameter_set import ParameterSet
from core.propagator.wave_group import WaveState
from core.solver.duhamel import ProductIntegrator
from core.solver.picard import TrajectorySolution

logger = logging.getLogger(__name__)

DEFAULT_HORIZON_TOLERANCE = 1e-6
CONSISTENCY_TOLERANCE = 1e-6


@dataclass
class AsymptoticData:
    state: WaveState = field(repr=False)
    direction: int
    truncation_bound: float
    trajectory: TrajectorySolution = field(repr=False)
    forcing_hat: np.ndarray = field(repr=False)
    total_moment: np.ndarray = field(repr=False)

    @property
    def spectral(self):
        """(û0±, û1±) in the orientation of the forward run."""
        transform = self.trajectory.transform
        state = self.state if self.direction == 1 else self.state.reflected()
        return transform.forward(state.u).values, transform.forward(state.ut).values


@dataclass
class DefectTrace:
    times: np.ndarray = field(repr=False)
    direct: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)
    weighted: np.ndarray = field(repr=False)
    linear_trace: np.ndarray = field(repr=False)
    rate: float = 0.0

    @property
    def consistency(self) -> float:
        """Largest gap between the two defect formulas, relative to the largest defect."""
        scale = float(np.max(self.direct, initial=0.0))
        if scale == 0.0:
            return float(np.max(self.tail, initial=0.0))
        return float(np.max(np.abs(self.direct - self.tail))) / scale

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"t": t, "defect": a, "weighted_defect": w, "linear_trace": lin, "tail_defect": b}
            for t, a, b, w, lin in zip(self.times, self.direct, self.tail, self.weighted, self.linear_trace)
        ]


def polish(trajectory: TrajectorySolution) -> TrajectorySolution:
    """One more Picard application, so u = v1 + 𝒯(F(u_stored)) exactly on the grid."""
    integrator = ProductIntegrator(trajectory.time_grid, trajectory.propagator.omega)
    v1_hat, v1t_hat = trajectory.linear_hat()
    duhamel_hat, duhamel_t_hat = integrator.apply(trajectory.forcing_hat())
    return trajectory.replaced(v1_hat + duhamel_hat, v1t_hat + duhamel_t_hat)


def truncation_bound(trajectory: TrajectorySolution, ps: ParameterSet, forcing_hat: np.ndarray) -> float:
    """
    L² size of the discarded ∫_T^∞ Ẇ(s)F ds, taking ‖F(u(s))‖_2 to decay
    at rate bα beyond the last node.
    """
    transform = trajectory.transform
    constant = transform.constant if transform.constant is not None else 1.0
    last = forcing_hat[-1]
    l2 = math.sqrt(max(constant * float(np.sum(transform.spectral.weights * last ** 2)), 0.0))
    return l2 / ps.b_alpha


def asymptotic_data(trajectory: TrajectorySolution, ps: ParameterSet, horizon_tol: float = DEFAULT_HORIZON_TOLERANCE,
                    check_horizon: bool = True) -> AsymptoticData:
    """(u0^±, u1^±) for the direction the trajectory was solved in."""
    if trajectory.time_grid.t_max < ps.t0:
        raise PreconditionError(
            "trajectory must reach t0 before scattering data are formed",
            [violation("t_max", f"t_max >= t0 = {ps.t0}", trajectory.time_grid.t_max)],
        )
    polished = polish(trajectory)
    forcing_hat = polished.forcing_hat()
    integrator = ProductIntegrator(polished.time_grid, polished.propagator.omega)
    total = integrator.moments(forcing_hat)[-1]
    omega = polished.propagator.omega

    u0_hat, u1_hat = polished.data_hat()
    plus0 = u0_hat - total.imag / omega
    plus1 = u1_hat + total.real
    transform = polished.transform
    state = WaveState(
        transform.radial.profile(transform.inverse_values(plus0)),
        transform.radial.profile(transform.inverse_values(plus1)),
    )
    if trajectory.direction == -1:
        state = state.reflected()

    bound = truncation_bound(polished, ps, forcing_hat)
    logger.info("scattering data (direction %+d): truncation bound %.3e", trajectory.direction, bound)
    if check_horizon and bound > horizon_tol:
        raise HorizonError(
            f"t_max={trajectory.time_grid.t_max:g} too short: truncation bound {bound:.3e} exceeds {horizon_tol:.1e}"
        )
    return AsymptoticData(state, trajectory.direction, bound, polished, forcing_hat, total)


def _free_evolution(asym: AsymptoticData) -> np.ndarray:
    plus0, plus1 = asym.spectral
    u_hat, _ = asym.trajectory.propagator.flow_spectral(asym.trajectory.time_grid.nodes, plus0, plus1)
    return u_hat


def scattering_defect(asym: AsymptoticData, ps: ParameterSet, t: float, d: Optional[float] = None) -> float:
    """‖u(t) - u^±(t)‖_{(b+1,d)} at a node t >= t0."""
    if t < ps.t0:
        raise PreconditionError("defect is measured for t >= t0", [violation("t", f"t >= {ps.t0}", t)])
    trajectory = asym.trajectory
    k = trajectory.time_grid.index_of(t)
    plus0, plus1 = asym.spectral
    u_plus, _ = trajectory.propagator.flow_spectral(t, plus0, plus1)
    difference = trajectory.u_hat[k] - u_plus
    e = LorentzExponents(ps.p, ps.d if d is None else d)
    values = trajectory.transform.inverse_values(difference[None, :])
    return float(lorentz_norms(values, trajectory.transform.radial.weights, e)[0])


def defect_trace(asym: AsymptoticData, ps: ParameterSet, d: Optional[float] = None, h: float = 0.0) -> DefectTrace:
    """
    Defect at every node t >= t0 by the direct difference and, independently,
    by Gauss-Legendre quadrature of ∫_t^T W(s-t)F ds.
    """
    trajectory = asym.trajectory
    transform = trajectory.transform
    weights = transform.radial.weights
    e = LorentzExponents(ps.p, ps.d if d is None else d)
    nodes = trajectory.time_grid.nodes
    tail = nodes >= ps.t0

    direct_hat = trajectory.u_hat - _free_evolution(asym)
    direct = lorentz_norms(transform.inverse_values(direct_hat[tail]), weights, e)

    oracle = ProductIntegrator(trajectory.time_grid, trajectory.propagator.omega, exact=False)
    remaining = oracle.tail_moments(asym.forcing_hat)
    omega = trajectory.propagator.omega
    rotated = np.exp(1j * nodes[:, None] * omega[None, :]) * np.conj(remaining)
    tail_hat = -rotated.imag / omega
    tail_norms = lorentz_norms(transform.inverse_values(tail_hat[tail]), weights, e)

    linear_hat, _ = trajectory.linear_hat()
    linear = lorentz_norms(transform.inverse_values(linear_hat[tail]), weights, e)

    times = nodes[tail]
    rate = ps.b_alpha + h
    return DefectTrace(
        times=times,
        direct=direct,
        tail=tail_norms,
        weighted=np.exp(rate * times) * direct,
        linear_trace=np.exp((ps.alpha + h) * times) * linear,
        rate=rate,
    )
