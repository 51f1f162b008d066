"""
Radial geometry of real hyperbolic space.

Volume density Ω_{n-1} sinh^{n-1} r, ball volumes, spherical functions
and the Plancherel density used by the spherical transform.
"""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

from core.errors import DomainError, InvalidDimensionError, UnsupportedDimensionError, violation

ArrayLike = Union[float, np.ndarray]

SUPPORTED_SPHERICAL_DIMENSIONS = (3, 5)

# below these radii the closed forms lose digits; Taylor series take over
_SERIES_RADIUS = {3: 1e-6, 5: 1e-3}


@dataclass(frozen=True)
class HyperbolicSpace:
    """ℍⁿ with its spectral gap ρ² = ((n-1)/2)²."""
    n: int

    def __post_init__(self):
        _check_dimension(self.n)

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2.0

    @property
    def spectral_gap(self) -> float:
        return self.rho ** 2

    def surface_measure(self) -> float:
        return surface_measure(self.n)

    def volume_density(self, r: ArrayLike) -> ArrayLike:
        return surface_measure(self.n) * np.sinh(r) ** (self.n - 1)

    def ball_volume(self, R: float) -> float:
        return ball_volume(self.n, R)

    def spherical_function(self, lam: ArrayLike, r: ArrayLike) -> np.ndarray:
        return spherical_function(self.n, lam, r)

    def plancherel_density(self, lam: ArrayLike) -> np.ndarray:
        return plancherel_density(self.n, lam)


def _check_dimension(n: int):
    if int(n) != n or n < 2:
        raise InvalidDimensionError(
            "dimension must be an integer >= 2",
            [violation("n", "n >= 2", n, "INVALID_DIMENSION")],
        )


def surface_measure(n: int) -> float:
    """Area of the unit sphere S^{n-1}: 2π^{n/2}/Γ(n/2)."""
    _check_dimension(n)
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def ball_volume(n: int, R: float) -> float:
    """Hyperbolic volume of a geodesic ball of radius R."""
    _check_dimension(n)
    if R < 0:
        raise DomainError("ball radius must be nonnegative", [violation("R", "R >= 0", R, "DOMAIN")])
    if n == 3:
        return math.pi * (math.sinh(2.0 * R) - 2.0 * R)
    if n == 2:
        return 2.0 * math.pi * (math.cosh(R) - 1.0)
    value, _ = integrate.quad(lambda r: math.sinh(r) ** (n - 1), 0.0, R, epsabs=0.0, epsrel=1e-13, limit=200)
    return surface_measure(n) * value


def _radial_series(n: int, lam: np.ndarray, r: np.ndarray) -> np.ndarray:
    # φ = 1 + a2 r² + a4 r⁴ from the radial eigen-ODE at the origin
    kappa = lam ** 2 + ((n - 1) / 2.0) ** 2
    a2 = -kappa / (2.0 * n)
    a4 = kappa * (kappa + 2.0 * (n - 1) / 3.0) / (8.0 * n * (n + 2))
    r2 = r * r
    return 1.0 + a2 * r2 + a4 * r2 * r2


def spherical_function(n: int, lam: ArrayLike, r: ArrayLike) -> np.ndarray:
    """
    Radial eigenfunction φ_λ of -Δ with eigenvalue λ²+ρ² and φ_λ(0) = 1.

    n = 3: sin(λr)/(λ sinh r). n = 5: one descent step from n = 3.
    Arguments broadcast against each other.
    """
    _check_dimension(n)
    if n not in SUPPORTED_SPHERICAL_DIMENSIONS:
        raise UnsupportedDimensionError(
            f"spherical functions are implemented for n in {SUPPORTED_SPHERICAL_DIMENSIONS}",
            [violation("n", "odd dimension 3 or 5", n, "UNSUPPORTED_DIMENSION")],
        )
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(lam < 0) or np.any(r < 0):
        raise DomainError("spherical functions need λ >= 0 and r >= 0",
                          [violation("lambda/r", "nonnegative arguments", None, "DOMAIN")])
    lam, r = np.broadcast_arrays(lam, r)
    small = r < _SERIES_RADIUS[n]
    safe_r = np.where(small, 1.0, r)

    # sin(λr)/λ with the λ → 0 limit r built in
    sin_over_lam = safe_r * np.sinc(lam * safe_r / np.pi)
    if n == 3:
        closed = sin_over_lam / np.sinh(safe_r)
    else:
        sh = np.sinh(safe_r)
        numerator = sin_over_lam * np.cosh(safe_r) - np.cos(lam * safe_r) * sh
        closed = 3.0 / (lam ** 2 + 1.0) * numerator / sh ** 3
    return np.where(small, _radial_series(n, lam, r), closed)


def plancherel_density(n: int, lam: ArrayLike) -> np.ndarray:
    """
    |c(λ)|^{-2} for odd n, normalized so that n = 3 gives λ²/(2π²).

    For other odd n the overall constant is fixed by calibration of the
    transform pair.
    """
    _check_dimension(n)
    if n % 2 == 0:
        raise UnsupportedDimensionError(
            "Plancherel density is implemented for odd n only",
            [violation("n", "odd dimension", n, "UNSUPPORTED_DIMENSION")],
        )
    lam = np.asarray(lam, dtype=float)
    density = np.ones_like(lam)
    for k in range((n - 1) // 2):
        density = density * (lam ** 2 + k ** 2)
    return density / (2.0 * math.pi ** 2)
