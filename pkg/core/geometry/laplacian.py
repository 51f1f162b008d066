"""Radial Laplace–Beltrami operator ∂_r² + (n-1) coth r ∂_r on grid profiles."""
from functools import lru_cache
from typing import Optional

import numpy as np

from core.errors import DiscretizationError, IncompatibleGridError
from core.geometry.grid import GAUSS_LEGENDRE, RadialProfile


@lru_cache(maxsize=16)
def _reference_differentiation(order: int) -> np.ndarray:
    # Lagrange differentiation matrix on the Gauss–Legendre nodes of [-1, 1]
    x, _ = np.polynomial.legendre.leggauss(order)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _panel_derivatives(f: RadialProfile):
    grid = f.grid
    D = _reference_differentiation(grid.order)
    half = 0.5 * grid.r_max / grid.panels
    vals = f.values.reshape(grid.panels, grid.order)
    first = vals @ D.T / half
    second = first @ D.T / half
    return first.ravel(), second.ravel()


def _central_derivatives(f: RadialProfile):
    r = f.grid.nodes
    v = f.values
    h = r[1] - r[0]
    first = np.empty_like(v)
    second = np.empty_like(v)
    first[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    second[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    return first, second


def apply_radial_laplacian(f: RadialProfile, n: Optional[int] = None) -> RadialProfile:
    """
    Discrete Δf for a radial profile.

    Gauss–Legendre grids differentiate the panel interpolant at every node.
    Uniform grids use three-point central differences; only interior nodes
    are meaningful there and the two end values are copied from their
    neighbours.
    """
    grid = f.grid
    if n is not None and n != grid.n:
        raise IncompatibleGridError(f"grid is built for n={grid.n}, not n={n}")
    if grid.num_points < 5:
        raise DiscretizationError(f"grid too coarse for the Laplacian: {grid.num_points} nodes")

    r = grid.nodes
    if grid.rule == GAUSS_LEGENDRE:
        first, second = _panel_derivatives(f)
        out = second + (grid.n - 1) * first / np.tanh(r)
    else:
        first, second = _central_derivatives(f)
        out = np.empty_like(f.values)
        inner = slice(1, -1)
        out[inner] = second[inner] + (grid.n - 1) * first[inner] / np.tanh(r[inner])
        out[0] = out[1]
        out[-1] = out[-2]
    return RadialProfile(grid, out)
