import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import ConstraintViolationError, DivergentIntegralError, PreconditionError, SingularEnvelopeError
from core.params.envelope import (
    beta_identity_constant,
    beta_identity_quadrature,
    envelope_bound,
    envelope_samples,
    find_t0,
    phi_p,
)
from core.params.parameter_set import (
    admissible_range,
    derive,
    effective_range,
    local_upper_bound,
    sample_admissible,
    sharp_lower_bound,
)


class TestDerive:
    @pytest.fixture(autouse=True)
    def setup(self, params3):
        self.params = params3

    def test_reference_values(self):
        assert self.params.beta == pytest.approx(0.459459, abs=1e-6)
        assert self.params.alpha_tilde == pytest.approx(0.317965, abs=1e-6)
        assert self.params.alpha == pytest.approx(0.347377, abs=1e-6)
        assert self.params.p == pytest.approx(3.7)

    def test_relations_hold(self):
        assert self.params.max_residual() <= 1e-12

    def test_ordering(self):
        assert 0.0 < self.params.b_alpha_tilde < self.params.b_alpha < 1.0
        assert 0.0 < self.params.sigma < self.params.beta

    def test_envelope_constant_attached(self):
        assert self.params.C_phi == pytest.approx(find_t0(3.7, 3).C)

    def test_h_sweep_inside_range(self):
        sweep = self.params.h_sweep()
        assert sweep[0] == 0.0
        assert all(h < self.params.h_max for h in sweep)
        assert self.params.with_h(sweep[-1]).h == sweep[-1]

    def test_h_at_limit_rejected(self):
        with pytest.raises(ConstraintViolationError) as exc:
            self.params.with_h(self.params.h_max)
        assert "h" in exc.value.offenders

    def test_b_below_interval_names_offender(self):
        with pytest.raises(ConstraintViolationError) as exc:
            derive(3, 2.0, 0.05)
        assert "b_lower_bound" in exc.value.offenders

    def test_b_above_interval_names_offender(self):
        with pytest.raises(ConstraintViolationError) as exc:
            derive(3, 3.2, 0.05)
        assert "b_upper_bound" in exc.value.offenders

    def test_sigma_must_be_positive(self):
        with pytest.raises(ConstraintViolationError) as exc:
            derive(3, 2.7, 0.0)
        assert "sigma" in exc.value.offenders

    def test_table_has_every_field(self):
        names = [name for name, _ in self.params.as_table()]
        assert names[:6] == ["n", "b", "sigma", "beta", "alpha_tilde", "alpha"]


class TestAdmissibleRegion:
    def test_n3_published_interval(self):
        low, high = admissible_range(3, 0.0)
        assert low == pytest.approx(1.0 + math.sqrt(2.0))
        assert high == 3.0

    def test_effective_interval_is_tighter(self):
        published = admissible_range(3, 0.05)
        effective = effective_range(3, 0.05)
        assert effective.low >= published.low
        assert effective.low == pytest.approx(sharp_lower_bound(3, 0.05))

    def test_local_upper_bound_n3(self):
        assert local_upper_bound(3) == pytest.approx((4.0 + math.sqrt(32.0)) / 4.0)

    @settings(max_examples=40, deadline=None)
    @given(n=st.sampled_from([2, 3, 4, 5]), seed=st.integers(0, 2 ** 32 - 1))
    def test_sampled_triples_are_admissible(self, n, seed):
        _, b, sigma = sample_admissible(np.random.default_rng(seed), n)
        params = derive(n, b, sigma)
        assert params.max_residual() <= 1e-12
        assert 0.0 < params.b_alpha_tilde < params.b_alpha < 1.0


class TestEnvelope:
    def test_find_t0_reference(self):
        fit = find_t0(3.7, 3, 1.0)
        assert fit.t0 == 1.0
        assert fit.C == pytest.approx(2.138, abs=0.01)

    def test_bound_dominates_on_samples(self):
        fit = find_t0(3.7, 3, 1.0)
        t = envelope_samples(fit.t0)
        assert np.all(phi_p(t, 3.7, 3) <= envelope_bound(t, 3.7, 3, fit.t0, fit.C) * (1.0 + 1e-12))

    def test_phi_symmetric(self):
        t = np.array([0.3, 1.0, 4.0])
        assert np.array_equal(phi_p(t, 3.7, 3), phi_p(-t, 3.7, 3))

    def test_phi_singular_at_zero(self):
        with pytest.raises(SingularEnvelopeError):
            phi_p(0.0, 3.7, 3)

    def test_phi_at_p2_is_regular(self):
        assert float(phi_p(0.0, 2.0, 3)) == 1.0

    def test_find_t0_rejects_endpoint(self):
        with pytest.raises(PreconditionError):
            find_t0(4.0, 3)


class TestBetaIdentity:
    def test_half_half_is_pi(self):
        assert beta_identity_constant(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_quadrature_scales_like_closed_form(self, params3, t):
        beta, gamma = params3.beta, params3.b_alpha_tilde
        scaled = t ** (beta + gamma - 1.0) * beta_identity_quadrature(beta, gamma, t)
        assert scaled == pytest.approx(beta_identity_constant(beta, gamma), rel=1e-6)

    def test_divergent_exponent_rejected(self):
        with pytest.raises(DivergentIntegralError) as exc:
            beta_identity_constant(0.4, 1.2)
        assert exc.value.offenders == ["b*alpha_tilde"]
