"""
Unit tests for evaluation-time image perturbations.
"""

import numpy as np
import pytest

from src.services.scene.perturb import VARIANTS, add_gaussian_noise, adjust_contrast, apply_variant


class TestNoise:
    """Tests for add_gaussian_noise"""

    def test_clamped_to_unit_interval(self, rng):
        """Strong noise never leaves [0, 1]"""
        noisy = add_gaussian_noise(np.full((64, 64), 0.5), 0.0, 1.0, rng)
        assert noisy.min() >= 0.0
        assert noisy.max() <= 1.0

    def test_mean_shift(self, rng):
        """Unclamped noise adds its mean"""
        noisy = add_gaussian_noise(np.full((128, 128), 0.5), 0.01, 0.001, rng)
        assert noisy.mean() == pytest.approx(0.51, abs=2e-3)

    def test_deterministic_given_generator(self):
        """Same seed, same noise"""
        img = np.full((8, 8), 0.3)
        a = add_gaussian_noise(img, 0.01, 0.01, np.random.default_rng(5))
        b = add_gaussian_noise(img, 0.01, 0.01, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_negative_variance(self, rng):
        """Variance must be nonnegative"""
        with pytest.raises(ValueError):
            add_gaussian_noise(np.zeros((2, 2)), 0.0, -0.1, rng)


class TestContrast:
    """Tests for adjust_contrast"""

    def test_linear_remap(self):
        """0 and 1 map onto the output range"""
        out = adjust_contrast(np.array([0.0, 0.5, 1.0]), 26 / 255, 200 / 255)
        assert np.allclose(out, [26 / 255, 113 / 255, 200 / 255])

    def test_identity_range_copies(self):
        """[0, 1] returns an unchanged copy"""
        img = np.array([0.2, 0.7])
        out = adjust_contrast(img, 0.0, 1.0)
        assert np.array_equal(out, img)
        assert out is not img

    def test_invalid_range(self):
        """out_low must be below out_high"""
        with pytest.raises(ValueError, match="contrast"):
            adjust_contrast(np.zeros(3), 0.8, 0.2)


class TestVariants:
    """Tests for named perturbation variants"""

    def test_six_variants(self):
        """clean, three noise levels, two contrast ranges"""
        assert len(VARIANTS) == 6
        assert VARIANTS[0] == "clean"

    def test_clean_is_a_copy(self, rng):
        """clean leaves pixels as they are"""
        img = np.full((4, 4), 0.8)
        out = apply_variant(img, "clean", rng)
        assert np.array_equal(out, img)
        assert out is not img

    def test_contrast_high(self, rng):
        """contrast-high compresses into the bright band"""
        out = apply_variant(np.array([0.0, 1.0]), "contrast-high", rng)
        assert np.allclose(out, [174 / 255, 240 / 255])

    def test_unknown_variant(self, rng):
        """Unknown names are refused"""
        with pytest.raises(ValueError, match="unknown"):
            apply_variant(np.zeros(2), "blur", rng)
