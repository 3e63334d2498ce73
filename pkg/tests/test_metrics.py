"""Distortion and error rates: reference readings plus the scale laws."""

import numpy as np
import pytest

from depthlens.errors import NonPositiveDenominator
from depthlens.metrics import adr, aer


class TestAdr:
    def test_crop_reading(self):
        assert adr(0.36, 0.28) == pytest.approx(0.286, abs=5e-4)

    def test_enlarge_reading(self):
        assert adr(0.50, 0.23) == pytest.approx(1.174, abs=5e-4)

    def test_no_distortion(self):
        assert adr(3.7, 3.7) == 0.0

    def test_rejects_nonpositive_benign(self):
        with pytest.raises(NonPositiveDenominator):
            adr(1.0, 0.0)


class TestAer:
    def test_iphone_reading(self):
        assert aer(11.57, 11.79) == pytest.approx(0.0187, abs=2e-4)

    def test_av_reading(self):
        # reported as 18.25%; reported depths are rounded, hence the slack
        assert aer(9.64, 11.79) == pytest.approx(0.1824, abs=3e-3)

    def test_perfect_target(self):
        assert aer(5.5, 5.5) == 0.0

    def test_rejects_nonpositive_target(self):
        with pytest.raises(NonPositiveDenominator):
            aer(1.0, -2.0)


class TestProperties:
    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b, k = rng.uniform(0.01, 50, 3)
            assert adr(k * a, k * b) == pytest.approx(adr(a, b), rel=1e-9)
            assert aer(k * a, k * b) == pytest.approx(aer(a, b), rel=1e-9)

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = rng.uniform(0.01, 50, 2)
            if a != b:
                assert adr(a, b) > 0
                assert aer(a, b) > 0

    def test_unbounded_above(self):
        assert adr(1e9, 1.0) > 1e8
        assert aer(1e9, 1.0) > 1e8
