import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lutquant.errors import ConfigError
from lutquant.fixedpoint import (
    Q1_7,
    FixedValue,
    QFormat,
    cordic_magnitude_phase,
    from_fixed,
    round_half_away,
    to_fixed,
)


def _round_oracle(x: float, frac_bits: int) -> int:
    """Exact rational rounding, ties away from zero."""
    q = Fraction(x) * (1 << frac_bits)
    mag = abs(q)
    r = math.floor(mag + Fraction(1, 2))
    return r if q >= 0 else -r


class TestQFormat:
    def test_q17_bounds(self):
        assert Q1_7.min_value == -1.0
        assert Q1_7.max_value == 1 - 2 ** -7
        assert Q1_7.resolution == 2 ** -7
        assert str(Q1_7) == "Q1.7"

    @pytest.mark.parametrize("total,frac", [(8, 9), (0, 0), (33, 8), (8, 0)])
    def test_invalid(self, total, frac):
        with pytest.raises(ConfigError):
            QFormat(total, frac)

    def test_raw_must_fit(self):
        with pytest.raises(ValueError):
            FixedValue(128, Q1_7)


class TestToFixed:
    @pytest.mark.parametrize("x,raw", [(0.5, 64), (-1.0, -128), (0.2, 26)])
    def test_examples(self, x, raw):
        assert to_fixed(x, Q1_7).raw == raw

    def test_derived_value_matches_oracle(self):
        assert _round_oracle(0.2, 7) == 26
        assert from_fixed(to_fixed(0.2, Q1_7)) == 0.203125

    def test_ties_away_from_zero(self):
        assert to_fixed(0.5 / 128, Q1_7).raw == 1
        assert to_fixed(-0.5 / 128, Q1_7).raw == -1
        assert to_fixed(1.5 / 128, Q1_7).raw == 2
        assert round_half_away(0.49999999999999994) == 0.0

    def test_saturates(self):
        assert to_fixed(3.0, Q1_7).raw == 127
        assert to_fixed(-3.0, Q1_7).raw == -128

    def test_non_finite(self):
        with pytest.raises(ValueError):
            to_fixed(float("nan"), Q1_7)

    @given(st.floats(-0.99, 0.99), st.integers(1, 15))
    def test_matches_rational_oracle(self, x, frac):
        fmt = QFormat(frac + 1, frac)
        expected = max(fmt.raw_min, min(fmt.raw_max, _round_oracle(x, frac)))
        assert to_fixed(x, fmt).raw == expected

    @given(st.floats(-1.0, 1.0, exclude_min=True, exclude_max=True))
    def test_error_bound(self, x):
        fmt = QFormat(12, 11)
        if x >= fmt.max_value:
            return
        assert abs(from_fixed(to_fixed(x, fmt)) - x) <= 2.0 ** -(fmt.frac_bits + 1)


class TestFromFixed:
    @pytest.mark.parametrize("raw,value", [(64, 0.5), (-128, -1.0), (26, 0.203125)])
    def test_examples(self, raw, value):
        assert from_fixed(FixedValue(raw, Q1_7)) == value

    @pytest.mark.parametrize("m", range(2, 13))
    def test_exhaustive_roundtrip(self, m):
        for fmt in (QFormat.q1(m), QFormat(m, m - 1, signed=False)):
            for raw in range(fmt.raw_min, fmt.raw_max + 1):
                assert to_fixed(from_fixed(FixedValue(raw, fmt)), fmt).raw == raw


Q15 = QFormat(16, 15)


def _cordic(re, im, iters=16):
    return cordic_magnitude_phase(to_fixed(re, Q15), to_fixed(im, Q15), iters)


class TestCordic:
    def test_axis(self):
        mag, ph = _cordic(0.6, 0.0)
        assert mag == pytest.approx(0.6, abs=1e-3)
        assert ph == pytest.approx(0.0, abs=1e-3)

    def test_three_four_five(self):
        # oracle: hypot(0.375, 0.5) = 0.625, atan2(0.5, 0.375) = 0.927295...
        assert math.hypot(0.375, 0.5) == 0.625
        mag, ph = _cordic(0.375, 0.5)
        assert mag == pytest.approx(0.625, rel=1e-3)
        assert ph == pytest.approx(math.atan2(0.5, 0.375), rel=1e-3)
        assert ph == pytest.approx(0.92730, rel=1e-3)

    def test_negative_imaginary_axis(self):
        mag, ph = _cordic(0.0, -0.5)
        assert mag == pytest.approx(0.5, abs=1e-3)
        assert ph == pytest.approx(-math.pi / 2, abs=1e-3)

    def test_zero_vector(self):
        assert _cordic(0.0, 0.0) == (0.0, 0.0)

    def test_negative_real_axis_phase_is_pi(self):
        mag, ph = _cordic(-0.5, 0.0)
        assert mag == pytest.approx(0.5, abs=1e-3)
        assert ph == pytest.approx(math.pi, abs=1e-3)
        assert -math.pi < ph <= math.pi

    @pytest.mark.parametrize("re,im", [(-0.3, 0.2), (-0.3, -0.2), (0.1, -0.4), (-0.01, -0.5)])
    def test_quadrants(self, re, im):
        mag, ph = _cordic(re, im)
        fr, fi = from_fixed(to_fixed(re, Q15)), from_fixed(to_fixed(im, Q15))
        assert mag == pytest.approx(math.hypot(fr, fi), rel=1e-3)
        assert ph == pytest.approx(math.atan2(fi, fr), abs=1e-3)

    def test_error_non_increasing_in_iterations(self):
        rng = np.random.default_rng(7)
        r = 0.6 * np.sqrt(rng.uniform(0.0001, 1, 1000))
        t = rng.uniform(-np.pi, np.pi, 1000)
        pts = [(to_fixed(a, Q15), to_fixed(b, Q15)) for a, b in zip(r * np.cos(t), r * np.sin(t))]
        refs = [(math.hypot(from_fixed(a), from_fixed(b)), math.atan2(from_fixed(b), from_fixed(a)))
                for a, b in pts]
        prev = math.inf
        for iters in range(8, 21):
            worst = 0.0
            for (a, b), (m_ref, p_ref) in zip(pts, refs):
                mag, ph = cordic_magnitude_phase(a, b, iters)
                dp = abs((ph - p_ref + math.pi) % (2 * math.pi) - math.pi)
                worst = max(worst, abs(mag - m_ref), dp)
            assert worst <= prev
            prev = worst

    def test_rejects_bad_args(self):
        a = to_fixed(0.1, Q15)
        with pytest.raises(ConfigError):
            cordic_magnitude_phase(a, a, 0)
        with pytest.raises(ConfigError):
            cordic_magnitude_phase(a, to_fixed(0.1, Q1_7), 8)
