from core.transform.spectral_grid import SpectralGrid, SpectralProfile, default_lambda_max
from core.transform.spherical_transform import KernelCache, SphericalTransform, calibrate

__all__ = [
    "KernelCache",
    "SpectralGrid",
    "SpectralProfile",
    "SphericalTransform",
    "calibrate",
    "default_lambda_max",
]
