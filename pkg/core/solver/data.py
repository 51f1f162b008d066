"""Initial data families: u0 = 0 and a Gaussian bump for u1."""
import numpy as np

from core.errors import PreconditionError, violation
from core.geometry.grid import RadialGrid, RadialProfile
from core.propagator.wave_group import WaveState

DEFAULT_WIDTH = 0.5
SUPPORT_WIDTHS = 5.0


def gaussian_bump(grid: RadialGrid, width: float = DEFAULT_WIDTH, amplitude: float = 1.0,
                  center: float = 0.0) -> RadialProfile:
    if not width > 0:
        raise PreconditionError("bump width must be positive", [violation("bump_width", "width > 0", width)])
    if center + SUPPORT_WIDTHS * width > grid.r_max:
        raise PreconditionError(
            "bump does not fit inside the radial grid",
            [violation("bump_width", f"center + {SUPPORT_WIDTHS:g}*width <= r_max", width)],
        )
    return grid.sample(lambda r: amplitude * np.exp(-((r - center) / width) ** 2))


def bump_data(grid: RadialGrid, width: float = DEFAULT_WIDTH, amplitude: float = 1.0,
              center: float = 0.0) -> WaveState:
    """(0, bump): Du0 = 0 and u1 smooth and decaying, so both lie in every L^{(p,d)}."""
    return WaveState(grid.zeros(), gaussian_bump(grid, width, amplitude, center))


def bump_difference(grid: RadialGrid, base: WaveState, width: float = DEFAULT_WIDTH, amplitude: float = 0.1,
                    center: float = 0.0) -> WaveState:
    """base plus a smaller bump in the velocity slot."""
    return base + bump_data(grid, width, amplitude, center)
