"""
Unit tests for scenario sampling on the parameter grids.
"""

import pytest

from src.core.errors import InsufficientCombinationsError, UnknownFamilyError
from src.services.scene.sampling import (
    GRIDS,
    SCENARIOS,
    Grid,
    combination_count,
    on_grid,
    sample_scenarios,
)
from src.services.scene.shapes import default_shape


class TestGrid:
    """Tests for Grid"""

    def test_value(self):
        """Grid points are lo + k * step"""
        grid = Grid(0.004, 1e-4, 61)
        assert grid.value(0) == 0.004
        assert grid.value(60) == pytest.approx(0.01)

    def test_contains(self):
        """Only exact grid points inside the range belong"""
        grid = Grid(0.004, 1e-4, 61)
        assert grid.contains(0.0058)
        assert not grid.contains(0.00585)
        assert not grid.contains(0.0101)


class TestSampleScenarios:
    """Tests for sample_scenarios"""

    def test_every_scenario_gets_its_instances(self):
        """11 scenarios x 3 instances"""
        specs = sample_scenarios(0, 3)
        assert len(specs) == len(SCENARIOS) * 3
        assert len({s.spec_id for s in specs}) == len(specs)
        assert len({s.scenario for s in specs}) == len(SCENARIOS)

    def test_parameters_sit_on_grid(self):
        """Every sampled value is an exact grid point"""
        assert all(on_grid(s) for s in sample_scenarios(0, 3))

    def test_deterministic(self):
        """Same seed, same specs"""
        assert sample_scenarios(7, 2) == sample_scenarios(7, 2)

    def test_seed_changes_draws(self):
        """Different seeds give different specs"""
        assert sample_scenarios(1, 2) != sample_scenarios(2, 2)

    def test_family_filter(self):
        """Restricting to R01 keeps its three scenarios"""
        specs = sample_scenarios(0, 1, families=["R01"])
        assert [s.scenario for s in specs] == ["R01-shape", "R01-length", "R01-both"]

    def test_unknown_family(self):
        """Unknown family names are refused"""
        with pytest.raises(UnknownFamilyError):
            sample_scenarios(0, 1, families=["Rxx"])

    def test_requires_instances(self):
        """At least one instance per scenario"""
        with pytest.raises(ValueError):
            sample_scenarios(0, 0)

    def test_too_many_instances(self):
        """R01-length only has 401 lengths"""
        assert combination_count("R01", "length") == GRIDS["length"].count == 401
        with pytest.raises(InsufficientCombinationsError):
            sample_scenarios(0, 402, families=["R01"])

    def test_length_mode_keeps_default_radii(self):
        """Length-only scenarios vary L on the default taper"""
        spec = next(s for s in sample_scenarios(0, 2, families=["R01"]) if s.scenario == "R01-length")
        assert spec.r0 == default_shape().r0
        assert spec.r1 == default_shape().r1
        assert 0.07 <= spec.length <= 0.11

    def test_cosine_family_has_seven_terms(self):
        """Rcc draws B_0 .. B_6"""
        spec = sample_scenarios(0, 1, families=["Rcc"])[0]
        assert len(spec.b) == 7
        assert spec.length == default_shape().length
