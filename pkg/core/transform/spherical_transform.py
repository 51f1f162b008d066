"""
Spherical (Helgason) transform of radial profiles by dense quadrature.

    forward:  ĝ(λ_j) = Σ_i w_i f(r_i) φ_{λ_j}(r_i)
    inverse:  f(r_i) = c_n Σ_j v_j ĝ(λ_j) φ_{λ_j}(r_i)

The φ_λ(r) table is built once per grid pair and shared through KernelCache.
"""
import csv
import logging
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from core.errors import CalibrationRequiredError, IncompatibleGridError, ResolutionError
from core.geometry.grid import RadialGrid, RadialProfile
from core.geometry.space import spherical_function
from core.transform.spectral_grid import SpectralGrid, SpectralProfile

logger = logging.getLogger(__name__)

CALIBRATION_TOLERANCE = 1e-3
DECAY_TOLERANCE = 1e-10
KERNEL_CACHE_CAPACITY = 8


class KernelCache:
    """Process-wide LRU cache of φ_λ(r) tables keyed by grid pair"""

    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super(KernelCache, cls).__new__(cls)
                    cls._instance._tables = OrderedDict()
                    cls._instance.capacity = KERNEL_CACHE_CAPACITY
        return cls._instance

    def get(self, radial: RadialGrid, spectral: SpectralGrid) -> np.ndarray:
        key = (radial.key, spectral.key)
        with self._lock:
            table = self._tables.get(key)
            if table is not None:
                self._tables.move_to_end(key)
                return table
            logger.debug("building kernel table %s x %s", spectral.num_points, radial.num_points)
            table = spherical_function(radial.n, spectral.nodes[:, None], radial.nodes[None, :])
            table.setflags(write=False)
            self._tables[key] = table
            self._evict()
        return table

    def _evict(self):
        while len(self._tables) > max(1, self.capacity):
            evicted, _ = self._tables.popitem(last=False)
            logger.debug("evicting kernel table %s", evicted)

    def __contains__(self, key) -> bool:
        return key in self._tables

    def clear(self):
        with self._lock:
            self._tables.clear()

    def __len__(self) -> int:
        return len(self._tables)


class SphericalTransform:
    """Forward/inverse transform pair on a (radial, spectral) grid pair."""

    def __init__(self, radial: RadialGrid, spectral: SpectralGrid, constant: Optional[float] = None):
        if radial.n != spectral.n:
            raise IncompatibleGridError(f"radial grid n={radial.n} but spectral grid n={spectral.n}")
        self.radial = radial
        self.spectral = spectral
        self.kernel = KernelCache().get(radial, spectral)
        # (N_r, N_λ): physical values @ forward_matrix -> spectral values
        self.forward_matrix = (self.kernel * radial.weights[None, :]).T
        self._weighted_kernel = spectral.weights[:, None] * self.kernel
        self.constant = constant
        self.calibration_error: Optional[float] = None

    @classmethod
    def build(cls, radial: RadialGrid, spectral: SpectralGrid) -> "SphericalTransform":
        transform = cls(radial, spectral)
        transform.calibrate()
        return transform

    @property
    def n(self) -> int:
        return self.radial.n

    @property
    def is_calibrated(self) -> bool:
        return self.constant is not None

    def _inverse_matrix(self) -> np.ndarray:
        if self.constant is None:
            raise CalibrationRequiredError("transform pair has not been calibrated")
        return self.constant * self._weighted_kernel

    def forward(self, f: RadialProfile) -> SpectralProfile:
        if f.grid != self.radial:
            raise IncompatibleGridError("profile grid does not match the transform's radial grid")
        return SpectralProfile(self.spectral, f.values @ self.forward_matrix)

    def inverse(self, g: SpectralProfile) -> RadialProfile:
        if g.grid != self.spectral:
            raise IncompatibleGridError("spectral profile grid does not match the transform's spectral grid")
        return RadialProfile(self.radial, g.values @ self._inverse_matrix())

    def forward_values(self, values: np.ndarray) -> np.ndarray:
        """Row-wise forward transform of a (..., N_r) array."""
        return np.asarray(values) @ self.forward_matrix

    def inverse_values(self, values: np.ndarray) -> np.ndarray:
        """Row-wise inverse transform of a (..., N_λ) array."""
        return np.asarray(values) @ self._inverse_matrix()

    def reference_width(self) -> float:
        return max(0.5, 12.0 / self.spectral.lambda_max)

    def calibrate(self) -> float:
        """Fit c_n on a reference Gaussian and store it with the pair."""
        width = self.reference_width()
        if 6.0 * width > self.radial.r_max:
            raise ResolutionError(
                f"radial grid (r_max={self.radial.r_max}) too short for the calibration Gaussian of width {width:.3g}"
            )
        f = np.exp(-(self.radial.nodes / width) ** 2)
        g = (f @ self.forward_matrix) @ self._weighted_kernel
        denom = float(np.dot(g, g))
        if denom == 0.0:
            raise ResolutionError("calibration profile vanished after the round trip")
        constant = float(np.dot(f, g)) / denom
        error = float(np.max(np.abs(constant * g - f)) / np.max(np.abs(f)))
        if error > CALIBRATION_TOLERANCE:
            raise ResolutionError(
                f"round-trip error {error:.3e} after calibration exceeds {CALIBRATION_TOLERANCE:g}"
            )
        self.constant = constant
        self.calibration_error = error
        logger.info("calibrated n=%d transform: c_n=%.12g, round-trip error %.3e", self.n, constant, error)
        return constant

    def round_trip_error(self, f: RadialProfile) -> float:
        back = self.inverse(self.forward(f))
        scale = f.sup_norm()
        return float(np.max(np.abs(back.values - f.values)) / scale) if scale > 0 else 0.0

    def plancherel(self, f: RadialProfile) -> Tuple[float, float]:
        """(physical ‖f‖², calibrated spectral ‖ĝ‖²)."""
        physical = float(np.sum(self.radial.weights * f.values ** 2))
        if self.constant is None:
            raise CalibrationRequiredError("transform pair has not been calibrated")
        spectral = self.constant * self.forward(f).l2_norm_squared()
        return physical, spectral

    def tail_fraction(self, g: Union[SpectralProfile, np.ndarray]) -> float:
        """Largest |ĝ| on the last panel relative to the overall maximum."""
        values = np.abs(g.values if isinstance(g, SpectralProfile) else np.asarray(g))
        values = values.reshape(-1, values.shape[-1])
        peak = float(values.max())
        if peak == 0.0:
            return 0.0
        return float(values[:, -self.spectral.order:].max() / peak)

    def check_decay(self, g: Union[SpectralProfile, np.ndarray], tol: float = DECAY_TOLERANCE) -> bool:
        fraction = self.tail_fraction(g)
        if fraction > tol:
            logger.warning(
                "spectral data not decayed before lambda_max=%.4g (tail fraction %.3e > %.1e)",
                self.spectral.lambda_max, fraction, tol,
            )
            return False
        return True

    def dump_kernel_table(self, path: Union[str, Path]) -> Path:
        """Write the φ_λ(r) table as CSV rows (r, lambda, phi)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["r", "lambda", "phi"])
            for j, lam in enumerate(self.spectral.nodes):
                for i, r in enumerate(self.radial.nodes):
                    writer.writerow([f"{r:.17g}", f"{lam:.17g}", f"{self.kernel[j, i]:.17g}"])
        return path


def calibrate(n: int, radial: RadialGrid, spectral: SpectralGrid) -> float:
    """Calibrated Plancherel constant c_n for the grid pair."""
    if radial.n != n or spectral.n != n:
        raise IncompatibleGridError(f"grids are not built for n={n}")
    return SphericalTransform(radial, spectral).calibrate()


def analytic_constant(n: int) -> Optional[float]:
    """Closed-form c_n where known (n=3 with the λ²/(2π²) density)."""
    return 1.0 if n == 3 else None


__all__ = [
    "KernelCache",
    "SphericalTransform",
    "analytic_constant",
    "calibrate",
]
