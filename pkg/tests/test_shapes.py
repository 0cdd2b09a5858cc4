"""
Unit tests for exosuit surface profiles.
"""

import math
import pickle

import numpy as np
import pytest

from src.core.errors import UnknownFamilyError
from src.models.shapes import FAMILIES, ShapeSpec
from src.services.geometry.rod import MIN_RADIUS
from src.services.scene.sampling import FAMILY_PARAMETERS, GRIDS
from src.services.scene.shapes import ShapeProfile, build_rod, control_shape, default_shape, radius_profile


class TestProfiles:
    """Tests for each family formula and the clamp"""

    def test_linear_taper(self):
        """R01 interpolates R0 -> R1"""
        spec = ShapeSpec(family="R01", r0=0.006, r1=0.004)
        assert radius_profile(spec, 0.0) == pytest.approx(0.006)
        assert radius_profile(spec, 0.5) == pytest.approx(0.005)
        assert radius_profile(spec, 1.0) == pytest.approx(0.004)

    def test_sine_ripple(self):
        """Rs adds a 5% sine on top of R0"""
        spec = ShapeSpec(family="Rs", r0=0.008, a=1.0)
        assert radius_profile(spec, 0.0) == pytest.approx(0.008)
        assert radius_profile(spec, 0.5) == pytest.approx(0.008 * 1.05)

    def test_sine_cosine_ripple(self):
        """Rsc combines sine and cosine terms"""
        spec = ShapeSpec(family="Rsc", r0=0.01, c=1.0, d=1.0, phi_c=0.0, phi_d=0.0)
        assert radius_profile(spec, 0.0) == pytest.approx(0.01 * 1.05)
        assert radius_profile(spec, 1.0) == pytest.approx(0.01 * 0.95)

    def test_cosine_series_in_centimeters(self):
        """Rcc amplitudes are centimeters"""
        assert radius_profile(ShapeSpec(family="Rcc", b=[1.0]), 0.3) == pytest.approx(0.01)
        spec = ShapeSpec(family="Rcc", b=[0.5, 0.2])
        assert radius_profile(spec, 0.0) == pytest.approx(0.007)
        assert radius_profile(spec, 1.0) == pytest.approx(MIN_RADIUS)

    def test_legendre_series_in_centimeters(self):
        """RLP uses 2 m_n / 3^n weights"""
        assert radius_profile(ShapeSpec(family="RLP", m=[0.6]), 0.2) == pytest.approx(0.012)
        assert radius_profile(ShapeSpec(family="RLP", m=[0.3, 0.3]), 1.0) == pytest.approx(0.008)

    def test_clamped_to_maximum(self):
        """Radii above max_radius are capped"""
        spec = ShapeSpec(family="R01", r0=0.05, r1=0.05)
        assert radius_profile(spec, 0.5) == pytest.approx(0.02)

    def test_cap_is_configurable(self):
        """Raising max_radius lets the raw formula through"""
        spec = ShapeSpec(family="R01", r0=0.05, r1=0.05, max_radius=0.1)
        assert radius_profile(spec, 0.5) == pytest.approx(0.05)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_floor_holds_for_random_draws(self, family):
        """20,000 (parameters, X_L) draws per family, 10^5 in all, stay within [0.4 cm, max_radius]"""
        rng = np.random.default_rng(FAMILIES.index(family))
        x_l = rng.uniform(0.0, 1.0, (2000, 10))
        x_l[:, 0] = 0.0
        x_l[:, 1] = 1.0
        for row in x_l:
            fields = {}
            for name, grid_name, repeat in FAMILY_PARAMETERS[family]:
                grid = GRIDS[grid_name]
                values = rng.uniform(grid.lo, grid.lo + grid.step * (grid.count - 1), repeat).tolist()
                fields[name] = values if repeat > 1 else values[0]
            spec = ShapeSpec(family=family, **fields)
            radii = radius_profile(spec, row)
            assert radii.min() >= MIN_RADIUS
            assert radii.max() <= spec.max_radius

    def test_vectorized(self):
        """Arrays of X_L return arrays"""
        spec = ShapeSpec(family="R01", r0=0.006, r1=0.004)
        values = radius_profile(spec, np.linspace(0.0, 1.0, 5))
        assert values.shape == (5,)
        assert np.all(np.diff(values) < 0.0)

    def test_rejects_out_of_range_abscissa(self):
        """X_L outside [0, 1] is refused"""
        with pytest.raises(ValueError, match="X_L"):
            radius_profile(default_shape(), 1.5)

    def test_unknown_family(self):
        """Unrecognized families raise UnknownFamilyError"""
        with pytest.raises(UnknownFamilyError):
            radius_profile(ShapeSpec(family="Rxx"), 0.5)

    def test_missing_parameters(self):
        """A family without its parameters is refused"""
        with pytest.raises(ValueError, match="missing"):
            radius_profile(ShapeSpec(family="Rs", r0=0.01), 0.5)


class TestRods:
    """Tests for ShapeProfile and build_rod"""

    def test_default_shape(self):
        """10 cm rod tapering 5.8 mm -> 4 mm"""
        rod = build_rod(default_shape())
        assert rod.length == 0.1
        assert rod.radius_at(0.0) == pytest.approx(0.0058)
        assert rod.radius_at(0.1) == pytest.approx(0.004)

    def test_control_shape(self):
        """The control rod is 9.5 cm long"""
        spec = control_shape()
        assert spec.length == 0.095
        assert build_rod(spec).radius_at(0.0) == pytest.approx(0.01)

    def test_profile_is_picklable(self):
        """Profiles survive a round trip through pickle"""
        profile = pickle.loads(pickle.dumps(ShapeProfile(default_shape())))
        assert math.isclose(profile(0.0), 0.0058)
