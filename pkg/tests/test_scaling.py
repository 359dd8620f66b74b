"""Min-max normalization between raw and unit scales."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pareto_pilot.scaling import NormalizationSpec

DEFAULT = NormalizationSpec(eps_min=0.01, eps_max=0.5, alpha_min=0.5, alpha_max=1.0)


class TestPrivacy:
    def test_endpoints(self):
        assert DEFAULT.normalize_privacy(0.01) == pytest.approx(1.0)
        assert DEFAULT.normalize_privacy(0.5) == pytest.approx(0.0)

    def test_geometric_midpoint(self):
        assert DEFAULT.normalize_privacy(math.sqrt(0.01 * 0.5)) == pytest.approx(0.5)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            DEFAULT.normalize_privacy(0.6)
        with pytest.raises(ValueError):
            DEFAULT.normalize_privacy(0.005)
        with pytest.raises(ValueError):
            DEFAULT.denormalize_privacy(1.5)

    @given(
        eps_min=st.floats(1e-4, 0.5),
        ratio=st.floats(1.5, 1e4),
        t=st.floats(0.0, 1.0),
    )
    def test_round_trip_identity(self, eps_min, ratio, t):
        spec = NormalizationSpec(eps_min, eps_min * ratio, 0.0, 1.0)
        eps = math.exp(
            math.log(spec.eps_min) + t * (math.log(spec.eps_max) - math.log(spec.eps_min))
        )
        back = spec.denormalize_privacy(spec.normalize_privacy(eps))
        assert back == pytest.approx(eps, rel=1e-12)

    def test_vectorized(self):
        eps = np.array([0.01, 0.1, 0.5])
        p = DEFAULT.normalize_privacy(eps)
        np.testing.assert_allclose(DEFAULT.denormalize_privacy(p), eps, rtol=1e-12)


class TestAccuracy:
    def test_round_trip(self):
        for a in (0.5, 0.73, 1.0):
            assert DEFAULT.denormalize_accuracy(DEFAULT.normalize_accuracy(a)) == pytest.approx(a)

    def test_affine(self):
        assert DEFAULT.normalize_accuracy(0.75) == pytest.approx(0.5)


def test_validation():
    with pytest.raises(ValueError):
        NormalizationSpec(0.5, 0.01, 0.0, 1.0)
    with pytest.raises(ValueError):
        NormalizationSpec(-0.1, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        NormalizationSpec(0.01, 0.5, 1.0, 1.0)


def test_privacy_level_ordering():
    # stronger privacy (smaller eps) maps to larger p
    spec = DEFAULT
    assert spec.p_min < spec.p_max
    assert spec.normalize_privacy(0.02) > spec.normalize_privacy(0.4)
