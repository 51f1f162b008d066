"""
Linear Klein-Gordon flow on ℍⁿ as spectral multipliers.

D = √(-Δ + c) acts on the spherical transform as multiplication by
ω(λ) = √(λ² + ρ² + c). W(t) = sin(tD)/D, Ẇ(t) = cos(tD).
"""
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core.errors import IncompatibleGridError, SingularMultiplierError, SpectralPositivityError, violation
from core.geometry.grid import RadialProfile, check_same_grid
from core.transform.spectral_grid import SpectralProfile
from core.transform.spherical_transform import SphericalTransform

logger = logging.getLogger(__name__)

OMEGA_SERIES_THRESHOLD = 1e-8
SINGULAR_MASS_TOLERANCE = 1e-10
LOW_BAND_CUTOFF = 0.05

Profile = Union[RadialProfile, SpectralProfile]
TimeLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MassParameter:
    """The constant c of ∂ₜ²u - Δu + cu = F(u); requires c >= -ρ²."""
    c: float
    n: int

    def __post_init__(self):
        floor = -((self.n - 1) / 2.0) ** 2
        if self.c < floor - 1e-15:
            raise SpectralPositivityError(
                "mass below the bottom of the spectrum",
                [violation("c", f"c >= -rho^2 = {floor}", self.c, "SPECTRAL_POSITIVITY")],
            )

    @classmethod
    def shifted(cls, n: int) -> "MassParameter":
        return cls(-((n - 1) / 2.0) ** 2, n)

    @classmethod
    def from_config(cls, c, n: int) -> "MassParameter":
        """None selects the shifted case."""
        return cls.shifted(n) if c is None else cls(float(c), n)

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2.0

    @property
    def is_shifted(self) -> bool:
        return abs(self.c + self.rho ** 2) <= 1e-15


def dispersion_relation(lam, c: Union[MassParameter, float], n: int) -> np.ndarray:
    """ω(λ) = √(λ² + ρ² + c); exactly λ in the shifted case."""
    mass = c if isinstance(c, MassParameter) else MassParameter(float(c), n)
    lam = np.asarray(lam, dtype=float)
    if mass.is_shifted:
        return np.abs(lam)
    return np.sqrt(lam ** 2 + mass.rho ** 2 + mass.c)


def sin_multiplier(t: TimeLike, omega: np.ndarray) -> np.ndarray:
    """sin(tω)/ω, broadcasting t against ω; equals t at ω = 0."""
    t = np.asarray(t, dtype=float)[..., None] if np.ndim(t) else float(t)
    small = omega < OMEGA_SERIES_THRESHOLD
    safe = np.where(small, 1.0, omega)
    series = t - t ** 3 * omega ** 2 / 6.0
    return np.where(small, series, np.sin(t * safe) / safe)


def cos_multiplier(t: TimeLike, omega: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)[..., None] if np.ndim(t) else float(t)
    return np.cos(t * omega)


@dataclass(frozen=True)
class WaveState:
    """Cauchy data / instantaneous state (u, ∂ₜu) on one radial grid."""
    u: RadialProfile
    ut: RadialProfile

    def __post_init__(self):
        check_same_grid(self.u, self.ut)

    @classmethod
    def zero(cls, grid) -> "WaveState":
        return cls(grid.zeros(), grid.zeros())

    @property
    def grid(self):
        return self.u.grid

    def scaled(self, a: float) -> "WaveState":
        return WaveState(a * self.u, a * self.ut)

    def __add__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.u + other.u, self.ut + other.ut)

    def __sub__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.u - other.u, self.ut - other.ut)

    def reflected(self) -> "WaveState":
        """Data of t ↦ u(-t)."""
        return WaveState(self.u, -self.ut)


class KleinGordonPropagator:
    """Spectral multipliers of the linear flow for a fixed mass c."""

    def __init__(self, transform: SphericalTransform, mass: MassParameter):
        if mass.n != transform.n:
            raise IncompatibleGridError(f"mass built for n={mass.n}, transform for n={transform.n}")
        self.transform = transform
        self.mass = mass
        self.omega = dispersion_relation(transform.spectral.nodes, mass, mass.n)

    @property
    def n(self) -> int:
        return self.mass.n

    def _apply(self, multiplier: np.ndarray, g: Profile) -> Profile:
        if isinstance(g, SpectralProfile):
            return SpectralProfile(g.grid, multiplier * g.values)
        spectral = self.transform.forward(g)
        return self.transform.inverse(SpectralProfile(spectral.grid, multiplier * spectral.values))

    def apply_W(self, t: float, g: Profile) -> Profile:
        return self._apply(sin_multiplier(t, self.omega), g)

    def apply_Wdot(self, t: float, g: Profile) -> Profile:
        return self._apply(cos_multiplier(t, self.omega), g)

    def apply_D(self, g: Profile) -> Profile:
        return self._apply(self.omega, g)

    def low_band_fraction(self, values: np.ndarray) -> float:
        """Share of the Plancherel mass of values on λ <= max(LOW_BAND_CUTOFF, first node)."""
        lam = self.transform.spectral.nodes
        weights = self.transform.spectral.weights
        mass = weights * np.asarray(values, dtype=float) ** 2
        total = float(np.sum(mass))
        if total <= 0.0:
            return 0.0
        band = lam <= max(LOW_BAND_CUTOFF, lam[0])
        return float(np.sum(mass[band])) / total

    def apply_Wdot_over_D(self, t: float, g: Profile, spectral_floor: float = 0.0) -> Profile:
        """
        cos(tD)/D. With spectral_floor > 0 the band λ < floor is projected out
        first; otherwise data reaching ω = 0 is rejected.
        """
        spectral = g if isinstance(g, SpectralProfile) else self.transform.forward(g)
        values = spectral.values.copy()
        lam = self.transform.spectral.nodes
        if spectral_floor > 0.0:
            values[lam < spectral_floor] = 0.0
        elif self.mass.is_shifted and self.low_band_fraction(values) > SINGULAR_MASS_TOLERANCE:
            raise SingularMultiplierError(
                "cos(tD)/D is singular at omega=0 and the data has spectral mass there"
            )
        if np.any((self.omega < OMEGA_SERIES_THRESHOLD) & (values != 0.0)):
            raise SingularMultiplierError("omega vanishes on the support of the data")
        safe = np.where(self.omega < OMEGA_SERIES_THRESHOLD, 1.0, self.omega)
        out = SpectralProfile(spectral.grid, np.cos(t * self.omega) / safe * values)
        return out if isinstance(g, SpectralProfile) else self.transform.inverse(out)

    def flow_spectral(self, t: TimeLike, u0_hat: np.ndarray, u1_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(û(t), ∂ₜû(t)); t may be an array, giving (len(t), N_λ) blocks."""
        c = cos_multiplier(t, self.omega)
        s = sin_multiplier(t, self.omega)
        u = c * u0_hat + s * u1_hat
        ut = -self.omega ** 2 * s * u0_hat + c * u1_hat
        return u, ut

    def linear_flow(self, t: float, data: WaveState) -> WaveState:
        u0 = self.transform.forward(data.u).values
        u1 = self.transform.forward(data.ut).values
        u, ut = self.flow_spectral(t, u0, u1)
        spectral = self.transform.spectral
        return WaveState(
            self.transform.inverse(SpectralProfile(spectral, u)),
            self.transform.inverse(SpectralProfile(spectral, ut)),
        )

    def energy(self, u_hat: np.ndarray, ut_hat: np.ndarray) -> float:
        """c_n Σ v (ω²û² + ∂ₜû²)."""
        weights = self.transform.spectral.weights
        constant = self.transform.constant if self.transform.constant is not None else 1.0
        return float(constant * np.sum(weights * (self.omega ** 2 * u_hat ** 2 + ut_hat ** 2)))

    def state_energy(self, state: WaveState) -> float:
        return self.energy(self.transform.forward(state.u).values, self.transform.forward(state.ut).values)
