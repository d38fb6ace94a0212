import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apamix.combination import (
    CombinationState,
    combine,
    combined_weight,
    lambda_of,
    update_a,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


class TestLambdaOf:
    def test_zero(self):
        assert lambda_of(0.0) == 0.5

    def test_at_clip_bound(self):
        # direct evaluation of 1/(1+e^-4)
        assert lambda_of(4.0) == pytest.approx(1.0 / (1.0 + math.exp(-4.0)), rel=1e-15)
        assert lambda_of(4.0) == pytest.approx(0.98201379, abs=1e-8)

    @given(st.floats(min_value=-50, max_value=50, allow_nan=False))
    def test_antisymmetry(self, a):
        assert lambda_of(-a) == pytest.approx(1.0 - lambda_of(a), abs=1e-12)


class TestCombine:
    def test_endpoints(self):
        assert combine(1.0, 3.0, -5.0, 0.0).y == 3.0
        assert combine(0.0, 3.0, -5.0, 0.0).y == -5.0

    def test_agreement(self):
        assert combine(0.37, 2.5, 2.5, 1.0).y == pytest.approx(2.5, abs=1e-15)

    def test_error(self):
        out = combine(0.5, 1.0, 3.0, 5.0)
        assert out.e == pytest.approx(5.0 - 2.0, abs=1e-15)

    @given(st.floats(min_value=0, max_value=1), finite, finite)
    def test_convexity(self, lam, y1, y2):
        y = combine(lam, y1, y2, 0.0).y
        assert min(y1, y2) - 1e-9 <= y <= max(y1, y2) + 1e-9


class TestUpdateA:
    def setup_method(self):
        self.state = CombinationState(a=1.0, a_plus=4.0, mu_a=100.0)

    def test_equal_outputs_no_move(self):
        assert update_a(self.state, e=0.5, y1=2.0, y2=2.0).a == self.state.a

    def test_zero_error_no_move(self):
        assert update_a(self.state, e=0.0, y1=2.0, y2=-1.0).a == self.state.a

    def test_clip_at_upper(self):
        state = CombinationState(a=4.0, a_plus=4.0, mu_a=100.0)
        out = update_a(state, e=1.0, y1=2.0, y2=0.0)  # positive increment
        assert out.a == 4.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            update_a(self.state, e=float("nan"), y1=0.0, y2=0.0)

    def test_direction_favors_better_filter(self):
        # when branch 1 has the much smaller a-priori error, the mean
        # increment of a is positive (mix drifts toward branch 1)
        rng = np.random.default_rng(0)
        state = CombinationState(a=0.0, a_plus=4.0, mu_a=1.0)
        incs = []
        for _ in range(4000):
            ea1 = 0.01 * rng.standard_normal()
            ea2 = 1.0 * rng.standard_normal()
            noise = 0.03 * rng.standard_normal()
            # y_l = d_clean - ea_l, e = lam*ea1 + (1-lam)*ea2 + noise
            d_clean = rng.standard_normal()
            y1, y2 = d_clean - ea1, d_clean - ea2
            e = state.lam * ea1 + (1 - state.lam) * ea2 + noise
            incs.append(update_a(state, e, y1, y2).a - state.a)
        assert np.mean(incs) > 0

    def test_lambda_stays_in_reachable_range(self):
        rng = np.random.default_rng(1)
        state = CombinationState(a=0.0, a_plus=4.0, mu_a=100.0)
        lo, hi = 1.0 - state.lam_plus, state.lam_plus
        for _ in range(20_000):
            e, y1, y2 = rng.standard_normal(3) * 10.0 ** rng.integers(-3, 3)
            state = update_a(state, float(e), float(y1), float(y2))
            assert lo <= state.lam <= hi

    @given(
        st.floats(min_value=-4, max_value=4),
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
    )
    def test_a_always_clipped(self, a0, e, y1, y2):
        state = CombinationState(a=a0, a_plus=4.0, mu_a=100.0)
        out = update_a(state, e, y1, y2)
        assert -4.0 <= out.a <= 4.0
        assert out.lam == pytest.approx(lambda_of(out.a), abs=1e-15)


class TestCombinedWeight:
    def test_equal_weights(self):
        w = np.array([1.0, 2.0])
        assert np.array_equal(combined_weight(0.3, w, w), w)

    def test_midpoint(self):
        out = combined_weight(0.5, np.array([2.0, 0.0]), np.array([0.0, 2.0]))
        assert np.allclose(out, [1.0, 1.0], atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            combined_weight(0.5, np.zeros(2), np.zeros(3))

    def test_a_priori_error_identity(self):
        # u'(w_opt - w_c) = lam*ea1 + (1-lam)*ea2 by linearity
        rng = np.random.default_rng(2)
        for _ in range(100):
            u, w_opt, w1, w2 = rng.standard_normal((4, 6))
            lam = rng.uniform()
            wc = combined_weight(lam, w1, w2)
            lhs = u @ (w_opt - wc)
            rhs = lam * (u @ (w_opt - w1)) + (1 - lam) * (u @ (w_opt - w2))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
