from core.geometry.space import (
    HyperbolicSpace,
    ball_volume,
    plancherel_density,
    spherical_function,
    surface_measure,
)
from core.geometry.grid import RadialGrid, RadialProfile, indicator_ball
from core.geometry.laplacian import apply_radial_laplacian

__all__ = [
    "HyperbolicSpace",
    "RadialGrid",
    "RadialProfile",
    "apply_radial_laplacian",
    "ball_volume",
    "indicator_ball",
    "plancherel_density",
    "spherical_function",
    "surface_measure",
]
