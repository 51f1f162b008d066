"""
Measured dispersive ratio

    (‖W(t)g‖_{(p,r)} + ‖Ẇ(t)/D g‖_{(p,r)}) / (φ_p(t) ‖g‖_{(p',r)})

over a set of sample times. The estimate only asserts a t-independent
constant, so the harness checks that the sup is finite and stable under
grid refinement.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from core.errors import PreconditionError, SingularMultiplierError, violation
from core.geometry.grid import RadialProfile
from core.lorentz.norms import lorentz_norm, lorentz_norms
from core.lorentz.rearrangement import LorentzExponents
from core.params.envelope import EnvelopeFit, endpoint_p, envelope_bound, phi_p
from core.propagator.wave_group import KleinGordonPropagator, cos_multiplier, sin_multiplier

logger = logging.getLogger(__name__)

REFINEMENT_TOLERANCE = 0.05


@dataclass
class DispersiveReport:
    p: float
    r: float
    g_norm: float
    times: np.ndarray = field(repr=False)
    w_norms: np.ndarray = field(repr=False)
    wdot_norms: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)
    wdot_skipped: bool = False

    @property
    def ratios(self) -> np.ndarray:
        numerator = self.w_norms + (0.0 if self.wdot_skipped else self.wdot_norms)
        return numerator / (self.envelope * self.g_norm)

    @property
    def sup_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup_ratio)

    def rows(self) -> List[Dict[str, object]]:
        return [
            {"t": t, "w_norm": a, "wdot_over_d_norm": b, "phi": phi, "ratio": q}
            for t, a, b, phi, q in zip(self.times, self.w_norms, self.wdot_norms, self.envelope, self.ratios)
        ]


def _check_exponent(p: float, n: int):
    if not 2.0 < p < endpoint_p(n):
        raise PreconditionError(
            "dispersive estimate needs 2 < p < 2(n+1)/(n-1)",
            [violation("p", f"2 < p < {endpoint_p(n):g}", p, "PRECONDITION")],
        )


def dispersive_ratio(g: RadialProfile, p: float, r: float, propagator: KleinGordonPropagator,
                     times: Sequence[float], spectral_floor: float = 0.0) -> DispersiveReport:
    n = propagator.n
    _check_exponent(p, n)
    times = np.asarray(times, dtype=float)
    if np.any(times == 0.0):
        raise PreconditionError("t = 0 is excluded: φ_p is singular there", [violation("t", "t != 0", 0.0)])

    source = LorentzExponents(p / (p - 1.0), r)
    g_norm = lorentz_norm(g, source)
    if not g_norm > 0 or not math.isfinite(g_norm):
        raise PreconditionError("g must be nonzero with finite dual norm", [violation("g", "0 < ||g|| < inf", g_norm)])

    transform = propagator.transform
    weights = transform.radial.weights
    target = LorentzExponents(p, r)
    g_hat = transform.forward(g).values
    omega = propagator.omega

    w_values = transform.inverse_values(sin_multiplier(times, omega) * g_hat)
    w_norms = lorentz_norms(w_values, weights, target)

    wdot_skipped = False
    wdot_norms = np.full(times.shape, math.nan)
    try:
        propagator.apply_Wdot_over_D(float(times[0]), transform.spectral.profile(g_hat), spectral_floor)
    except SingularMultiplierError as exc:
        logger.warning("skipping the cos(tD)/D term: %s", exc)
        wdot_skipped = True
    if not wdot_skipped:
        hat = g_hat.copy()
        if spectral_floor > 0.0:
            hat[transform.spectral.nodes < spectral_floor] = 0.0
        safe = np.where(omega > 0.0, omega, 1.0)
        wdot_values = transform.inverse_values(cos_multiplier(times, omega) / safe * hat)
        wdot_norms = lorentz_norms(wdot_values, weights, target)

    report = DispersiveReport(
        p=p, r=r, g_norm=g_norm, times=times, w_norms=w_norms, wdot_norms=wdot_norms,
        envelope=phi_p(times, p, n), wdot_skipped=wdot_skipped,
    )
    logger.info("dispersive ratio p=%g r=%g: sup %.6g over %d samples", p, r, report.sup_ratio, times.size)
    return report


def refinement_change(coarse: DispersiveReport, fine: DispersiveReport) -> float:
    """Relative change of the measured sup between two resolutions."""
    return abs(fine.sup_ratio - coarse.sup_ratio) / coarse.sup_ratio


def envelope_dominates(p: float, n: int, fit: EnvelopeFit, samples: np.ndarray) -> bool:
    ratio = phi_p(samples, p, n) / envelope_bound(samples, p, n, fit.t0, fit.C)
    return bool(np.all(ratio <= 1.0 + 1e-12))


__all__ = [
    "DispersiveReport",
    "REFINEMENT_TOLERANCE",
    "dispersive_ratio",
    "envelope_dominates",
    "refinement_change",
]
