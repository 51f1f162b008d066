import numpy as np
import pytest

from core.errors import CalibrationRequiredError, IncompatibleGridError
from core.geometry.grid import RadialGrid
from core.geometry.space import HyperbolicSpace
from core.transform.spectral_grid import SpectralGrid, default_lambda_max
from core.transform.spherical_transform import KernelCache, SphericalTransform

WIDTHS = (0.8, 1.0, 1.5)


def gaussian(grid, width):
    return grid.sample(lambda r: np.exp(-(r / width) ** 2))


class TestSphericalTransform:
    @pytest.fixture(autouse=True)
    def setup(self, transform3):
        self.transform = transform3
        self.radial = transform3.radial

    def test_n3_constant_is_one(self):
        assert self.transform.constant == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("width", WIDTHS)
    def test_round_trip(self, width):
        assert self.transform.round_trip_error(gaussian(self.radial, width)) <= 1e-6

    @pytest.mark.parametrize("width", WIDTHS)
    def test_plancherel(self, width):
        physical, spectral = self.transform.plancherel(gaussian(self.radial, width))
        assert abs(physical - spectral) / physical <= 1e-6

    def test_linearity(self, rng):
        f = gaussian(self.radial, 1.0)
        g = gaussian(self.radial, 1.5)
        a, b = (float(x) for x in rng.normal(size=2))
        lhs = self.transform.forward(f * a + g * b).values
        rhs = a * self.transform.forward(f).values + b * self.transform.forward(g).values
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.max(np.abs(rhs)))

    def test_batched_matches_single(self):
        f = gaussian(self.radial, 1.2)
        single = self.transform.forward(f).values
        batched = self.transform.forward_values(np.stack([f.values, 2.0 * f.values]))
        assert np.allclose(batched[0], single, rtol=1e-12)
        assert np.allclose(batched[1], 2.0 * single, rtol=1e-12)

    def test_decay_check(self):
        smooth = self.transform.forward(gaussian(self.radial, 1.5))
        assert self.transform.check_decay(smooth)
        rough = self.radial.sample(lambda r: (r < 1.0).astype(float))
        assert not self.transform.check_decay(self.transform.forward(rough))

    def test_wrong_grid_rejected(self):
        other = RadialGrid.gauss_legendre(HyperbolicSpace(3), 10.0, 128, 8)
        with pytest.raises(IncompatibleGridError):
            self.transform.forward(other.zeros())

    def test_kernel_table_shared(self):
        again = SphericalTransform(self.radial, self.transform.spectral)
        assert again.kernel is self.transform.kernel
        assert len(KernelCache()) >= 1

    def test_uncalibrated_inverse_rejected(self):
        raw = SphericalTransform(self.radial, self.transform.spectral)
        with pytest.raises(CalibrationRequiredError):
            raw.inverse(raw.forward(gaussian(self.radial, 1.0)))

    def test_kernel_dump(self, tmp_path):
        small_radial = RadialGrid.gauss_legendre(HyperbolicSpace(3), 8.0, 64, 8)
        small_spectral = SpectralGrid.gauss_legendre(HyperbolicSpace(3), 6.0, 16, 8)
        path = SphericalTransform(small_radial, small_spectral).dump_kernel_table(tmp_path / "kernel.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "r,lambda,phi"
        assert len(lines) == 1 + 64 * 16


class TestSpectralGrid:
    def test_for_reach_panel_count(self):
        grid = SpectralGrid.for_reach(HyperbolicSpace(3), 12.0, 16.0, 8)
        assert grid.num_points == 8 * int(np.ceil(12.0 * 16.0 / np.pi))

    def test_refined_doubles(self):
        grid = SpectralGrid.gauss_legendre(HyperbolicSpace(3), 10.0, 64, 8)
        assert grid.refined().num_points == 128

    def test_default_lambda_max(self):
        radial = RadialGrid.gauss_legendre(HyperbolicSpace(3), 10.0, 256, 8)
        assert default_lambda_max(radial) == pytest.approx(np.pi * 256 / 10.0)


class TestKernelCache:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.cache = KernelCache()
        self.capacity = self.cache.capacity
        self.cache.capacity = 2
        self.space = HyperbolicSpace(3)
        self.spectral = SpectralGrid.gauss_legendre(self.space, 4.0, 8, 8)
        yield
        self.cache.capacity = self.capacity

    def radial(self, r_max):
        return RadialGrid.gauss_legendre(self.space, r_max, 16, 8)

    def key(self, r_max):
        return (self.radial(r_max).key, self.spectral.key)

    def test_capacity_bounds_entries(self):
        for r_max in (3.0, 4.0, 5.0):
            self.cache.get(self.radial(r_max), self.spectral)
        assert len(self.cache) == 2
        assert self.key(3.0) not in self.cache
        assert self.key(5.0) in self.cache

    def test_least_recently_used_is_evicted(self):
        self.cache.get(self.radial(3.0), self.spectral)
        self.cache.get(self.radial(4.0), self.spectral)
        self.cache.get(self.radial(3.0), self.spectral)
        self.cache.get(self.radial(5.0), self.spectral)
        assert self.key(3.0) in self.cache
        assert self.key(4.0) not in self.cache

    def test_evicted_table_stays_with_its_transform(self):
        transform = SphericalTransform(self.radial(3.0), self.spectral)
        for r_max in (4.0, 5.0):
            self.cache.get(self.radial(r_max), self.spectral)
        assert self.key(3.0) not in self.cache
        assert transform.kernel.shape == (8, 16)
