import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consensus_kit.coupling import (
    CouplingKind,
    ScaledCoupling,
    eval_attractive,
    eval_coupling,
    eval_derivative,
    eval_repulsive,
    wrap_pi,
    wrap_to_branch,
)
from consensus_kit.errors import BadArgs, BarrierHit

A, R = CouplingKind.ATTRACTIVE, CouplingKind.REPULSIVE
rng = np.random.default_rng(20240611)


class TestWrap:
    @pytest.mark.parametrize(
        "theta, kind, expected",
        [
            (math.pi, A, math.pi),
            (-math.pi, A, math.pi),
            (3 * math.pi, A, math.pi),
            (0.3, A, 0.3),
            (-0.3, A, -0.3),
            (-0.3, R, 2 * math.pi - 0.3),
            (2 * math.pi, R, 0.0),
            (7.0, R, 7.0 - 2 * math.pi),
        ],
    )
    def test_examples(self, theta, kind, expected):
        assert wrap_to_branch(theta, kind) == pytest.approx(expected, abs=1e-12)

    def test_small_values_are_exact(self):
        for x in (1e-300, 1e-17, 2.5e-9, -3.3e-13):
            assert wrap_pi(x) == x

    @given(st.floats(-1e4, 1e4))
    def test_ranges(self, x):
        a = wrap_to_branch(x, A)
        r = wrap_to_branch(x, R)
        assert -math.pi < a <= math.pi
        assert 0.0 <= r < 2 * math.pi
        assert math.isclose(math.cos(a), math.cos(x), abs_tol=1e-9)
        assert math.isclose(math.sin(r), math.sin(x), abs_tol=1e-9)

    def test_vectorised(self):
        out = wrap_pi(np.array([0.0, 4.0, -4.0]))
        assert out.shape == (3,)
        assert out[1] == pytest.approx(4.0 - 2 * math.pi)


class TestPrototypes:
    def test_reference_values(self):
        assert eval_attractive(math.pi / 2) == pytest.approx(1.0)
        assert eval_attractive(4 * math.pi / 7) == pytest.approx(1.25396, abs=1e-5)
        assert eval_repulsive(math.pi) == pytest.approx(0.0, abs=1e-15)
        assert eval_repulsive(math.pi / 2) == pytest.approx(-1.0)

    @pytest.mark.parametrize("kind", [A, R])
    def test_odd(self, kind):
        x = rng.uniform(-math.pi + 1e-3, math.pi - 1e-3, size=10_000)
        x = x[np.abs(x) > 1e-3]
        f = np.asarray(eval_coupling(kind, x))
        g = np.asarray(eval_coupling(kind, -x))
        assert np.max(np.abs(f + g)) <= 1e-9 * np.max(np.abs(f))

    def test_repulsive_odd_bit_for_bit_near_zero(self):
        for x in (1e-4, 3.7e-6, 2.2e-5):
            assert eval_repulsive(-x) == -eval_repulsive(x)

    def test_two_pi_periodic(self):
        x = rng.uniform(0.01, 6.27, size=1000)
        for kind in (A, R):
            keep = np.abs(np.cos(0.5 * x)) > 1e-3 if kind is A else np.ones_like(x, bool)
            y = x[keep]
            assert np.allclose(eval_coupling(kind, y), eval_coupling(kind, y + 2 * math.pi), rtol=1e-9)

    def test_monotone_on_branch(self):
        a = np.linspace(-math.pi + 1e-3, math.pi - 1e-3, 5001)
        r = np.linspace(1e-3, 2 * math.pi - 1e-3, 5001)
        assert np.all(np.diff(eval_attractive(a)) > 0)
        assert np.all(np.diff(eval_repulsive(r)) > 0)

    @pytest.mark.parametrize("kind", [A, R])
    def test_derivative_matches_finite_differences(self, kind):
        lo, hi = (-2.8, 2.8) if kind is A else (0.4, 2 * math.pi - 0.4)
        x = rng.uniform(lo, hi, size=500)
        h = 1e-5
        fd = (np.asarray(eval_coupling(kind, x + h)) - np.asarray(eval_coupling(kind, x - h))) / (2 * h)
        assert np.max(np.abs(fd - np.asarray(eval_derivative(kind, x)))) < 1e-6

    def test_barriers_raise(self):
        with pytest.raises(BarrierHit):
            eval_attractive(math.pi)
        with pytest.raises(BarrierHit):
            eval_repulsive(0.0)
        with pytest.raises(BarrierHit):
            eval_repulsive(np.array([1.0, 2 * math.pi]))
        with pytest.raises(BarrierHit):
            eval_derivative(A, -math.pi)

    def test_blow_up_near_barriers(self):
        assert eval_attractive(math.pi - 1e-6) > 1e6
        assert eval_repulsive(1e-6) < -1e6
        assert eval_repulsive(2 * math.pi - 1e-6) > 1e6


class TestScaled:
    def test_scales_value_and_slope(self):
        c = ScaledCoupling("attractive", 2.5)
        assert c(math.pi / 2) == pytest.approx(2.5)
        assert c.derivative(0.0) == pytest.approx(1.25)
        assert c.kind is A

    def test_positive_coefficient(self):
        with pytest.raises(BadArgs):
            ScaledCoupling(R, 0.0)
