import math

import numpy as np
import pytest

from core.errors import DiscretizationError, PreconditionError
from core.estimates.dispersive import (
    REFINEMENT_TOLERANCE,
    dispersive_ratio,
    envelope_dominates,
    refinement_change,
)
from core.estimates.weighted_norms import data_norm, time_weights, weighted_norm, weighted_sup
from core.params.envelope import envelope_samples, find_t0
from core.propagator.wave_group import KleinGordonPropagator, MassParameter
from core.transform.spherical_transform import SphericalTransform


class TestWeightedNorms:
    def test_weights_reject_time_zero(self):
        with pytest.raises(DiscretizationError):
            time_weights(np.array([0.0, 0.5]), 0.3, 0.2, 1.0)

    def test_branches(self):
        w = time_weights(np.array([0.5, 2.0]), 0.3, 0.2, 1.0)
        assert w[0] == pytest.approx(0.5 ** 0.2)
        assert w[1] == pytest.approx(math.exp(0.6))

    def test_weighted_sup_sums_branches(self):
        value = weighted_sup(np.array([0.25, 0.5, 2.0, 3.0]), np.array([1.0, 1.0, 1.0, 0.5]), 0.3, 0.2, 1.0)
        assert value == pytest.approx(0.5 ** 0.2 + max(math.exp(0.6), 0.5 * math.exp(0.9)))

    def test_incomplete_without_tail(self, params3):
        report = weighted_norm([0.1, 0.5], [1.0, 1.0], params3)
        assert not report.complete
        assert report.tail_part == 0.0
        assert report.total == pytest.approx(0.5 ** params3.alpha_tilde)

    def test_rows_label_branches(self, params3):
        report = weighted_norm([0.5, 1.5], [2.0, 1.0], params3)
        branches = [row["branch"] for row in report.rows(params3.t0)]
        assert branches == ["core", "tail"]

    def test_negative_samples_rejected(self, params3):
        with pytest.raises(DiscretizationError):
            weighted_norm([0.5, 1.5], [1.0, -1.0], params3)

    def test_odd_data_norm_is_two_sided(self, small_data, params3, propagator3, time_grid3):
        # (0, u1) data evolves to an odd function of t
        one_sided = data_norm(small_data, params3, propagator3, time_grid3, two_sided=False)
        two_sided = data_norm(small_data, params3, propagator3, time_grid3)
        assert two_sided == pytest.approx(one_sided, rel=1e-12)


class TestDispersive:
    TIMES = np.array([0.25, 0.5, 1.0, 2.0, 4.0])

    @pytest.fixture(autouse=True)
    def setup(self, transform3, propagator3):
        self.propagator = propagator3
        self.g = transform3.radial.sample(lambda r: np.exp(-(r / 1.5) ** 2))

    def test_finite_ratio(self):
        report = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, self.TIMES)
        assert report.finite
        assert report.sup_ratio > 0.0
        assert len(report.rows()) == self.TIMES.size

    def test_shifted_case_skips_cos_term(self):
        report = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, self.TIMES)
        assert report.wdot_skipped

    def test_symmetric_in_time(self):
        forward = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, self.TIMES)
        backward = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, -self.TIMES)
        assert np.allclose(forward.ratios, backward.ratios, rtol=1e-12)

    def test_time_zero_rejected(self):
        with pytest.raises(PreconditionError):
            dispersive_ratio(self.g, 3.7, 2.0, self.propagator, [0.0, 1.0])

    @pytest.mark.parametrize("p", [2.0, 4.0, 5.0])
    def test_exponent_outside_range(self, p):
        with pytest.raises(PreconditionError):
            dispersive_ratio(self.g, p, 2.0, self.propagator, self.TIMES)

    def test_refinement_change_of_identical_reports(self):
        report = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, self.TIMES)
        assert refinement_change(report, report) == 0.0

    def test_sup_ratio_stable_under_refinement(self, transform3):
        coarse = dispersive_ratio(self.g, 3.7, 2.0, self.propagator, self.TIMES)
        fine_transform = SphericalTransform.build(transform3.radial.refined(), transform3.spectral.refined())
        fine_propagator = KleinGordonPropagator(fine_transform, MassParameter.shifted(3))
        g = fine_transform.radial.sample(lambda r: np.exp(-(r / 1.5) ** 2))
        fine = dispersive_ratio(g, 3.7, 2.0, fine_propagator, self.TIMES)
        assert fine.finite
        assert refinement_change(coarse, fine) <= REFINEMENT_TOLERANCE

    def test_envelope_dominates_fit(self):
        fit = find_t0(3.7, 3)
        assert envelope_dominates(3.7, 3, fit, envelope_samples(fit.t0))
