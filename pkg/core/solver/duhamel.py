"""
Product integration of the Duhamel convolution

    𝒯F(t) = ∫₀ᵗ W(t-s) F(s) ds,   W = sin(tω)/ω on the spectral side.

F̂ is interpolated piecewise linearly in s between time nodes and the
oscillatory factor e^{iωs} is integrated exactly (Filon weights), so the rule
is exact for forcing linear in s and second order otherwise. With
M(t) = ∫₀ᵗ e^{iωs}F̂(s) ds,

    𝒯F(t) = Im(e^{iωt} conj M(t)) / ω,   ∂ₜ𝒯F(t) = Re(e^{iωt} conj M(t)).

On a grid with a nonzero endpoint exponent γ the first panel uses the
profile F(s1)(s/s1)^{-γ} instead of the linear interpolant.
"""
import logging
import math
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from core.errors import SingularMultiplierError
from core.solver.time_grid import TimeGrid

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 0.5
SERIES_TERMS = 16
SINGULAR_TERMS = 60
ORACLE_POINTS = 8
SINGULAR_ORACLE_POINTS = 24


def filon_moments(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """I0 = ∫₀¹ e^{iθx} dx and I1 = ∫₀¹ x e^{iθx} dx."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, theta)
    e = np.exp(1j * safe)
    i0 = (e - 1.0) / (1j * safe)
    i1 = e / (1j * safe) + (e - 1.0) / safe ** 2

    z = 1j * np.where(small, theta, 0.0)
    s0 = np.zeros_like(z)
    s1 = np.zeros_like(z)
    power = np.ones_like(z)
    for k in range(SERIES_TERMS):
        s0 = s0 + power / math.factorial(k + 1)
        s1 = s1 + power / (math.factorial(k) * (k + 2))
        power = power * z
    return np.where(small, s0, i0), np.where(small, s1, i1)


def singular_moment(theta: np.ndarray, gamma: float) -> np.ndarray:
    """∫₀¹ e^{iθx} x^{-γ} dx by its everywhere convergent series."""
    z = 1j * np.asarray(theta, dtype=float)
    total = np.zeros_like(z)
    power = np.ones_like(z)
    for k in range(SINGULAR_TERMS):
        total = total + power / (math.factorial(k) * (k + 1.0 - gamma))
        power = power * z
    return total


def _unit_nodes(points: int, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [0, 1] with 2^level equal subpanels."""
    x, w = leggauss(points)
    pieces = 2 ** level
    left = np.arange(pieces) / pieces
    nodes = (left[:, None] + (x[None, :] + 1.0) / (2.0 * pieces)).ravel()
    weights = np.tile(w / (2.0 * pieces), pieces)
    return nodes, weights


class ProductIntegrator:
    """
    Convolution weights for one time grid and one frequency vector.

    With exact=False the panel weights are computed by subdivided
    Gauss-Legendre quadrature (Gauss-Jacobi on a singular first panel); this
    is the independent oracle used for residual checks.
    """

    def __init__(self, time_grid: TimeGrid, omega: np.ndarray, exact: bool = True, level: int = 1):
        self.time_grid = time_grid
        self.omega = np.asarray(omega, dtype=float)
        if np.any(self.omega <= 0.0):
            raise SingularMultiplierError("product rule needs strictly positive frequencies")
        self.exact = exact
        self.level = level
        if exact:
            self.left, self.right = self._filon_weights()
        else:
            self.left, self.right = self._oracle_weights()

    @property
    def singular(self) -> bool:
        return self.time_grid.endpoint_exponent > 0.0

    def _filon_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        nodes = self.time_grid.nodes
        h = np.diff(nodes)[:, None]
        theta = h * self.omega[None, :]
        phase = np.exp(1j * nodes[:-1, None] * self.omega[None, :])
        i0, i1 = filon_moments(theta)
        left = h * phase * (i0 - i1)
        right = h * phase * i1
        if self.singular:
            left[0] = 0.0
            right[0] = h[0] * singular_moment(theta[0], self.time_grid.endpoint_exponent)
        return left, right

    def _oracle_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        nodes = self.time_grid.nodes
        x, w = _unit_nodes(ORACLE_POINTS, self.level)
        panels = nodes.size - 1
        left = np.empty((panels, self.omega.size), dtype=complex)
        right = np.empty_like(left)
        for p in range(panels):
            h = nodes[p + 1] - nodes[p]
            phase = np.exp(1j * np.outer(nodes[p] + h * x, self.omega))
            left[p] = h * ((w * (1.0 - x)) @ phase)
            right[p] = h * ((w * x) @ phase)
        if self.singular:
            gamma = self.time_grid.endpoint_exponent
            y, wj = roots_jacobi(SINGULAR_ORACLE_POINTS, 0.0, -gamma)
            xs = (1.0 + y) / 2.0
            h = nodes[1]
            phase = np.exp(1j * np.outer(h * xs, self.omega))
            left[0] = 0.0
            right[0] = h * 2.0 ** (gamma - 1.0) * (wj @ phase)
        return left, right

    def moments(self, forcing_hat: np.ndarray) -> np.ndarray:
        """M(t_k) for every node; forcing_hat has shape (N_t, N_λ)."""
        forcing_hat = np.asarray(forcing_hat, dtype=float)
        contributions = self.left * forcing_hat[:-1] + self.right * forcing_hat[1:]
        moments = np.zeros((forcing_hat.shape[0], self.omega.size), dtype=complex)
        np.cumsum(contributions, axis=0, out=moments[1:])
        return moments

    def apply(self, forcing_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(𝒯F, ∂ₜ𝒯F) at every node, spectral side."""
        moments = self.moments(forcing_hat)
        return self.from_moments(moments)

    def from_moments(self, moments: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = self.time_grid.nodes[:, None]
        rotated = np.exp(1j * t * self.omega[None, :]) * np.conj(moments)
        return rotated.imag / self.omega, rotated.real

    def tail_moments(self, forcing_hat: np.ndarray) -> np.ndarray:
        """∫_{t_k}^{t_max} e^{iωs}F̂(s) ds for every node."""
        moments = self.moments(forcing_hat)
        return moments[-1][None, :] - moments
