import pytest

from subtree_distance.config import Settings, parse_tolerance
from subtree_distance.exceptions import ConfigurationError


class TestParseTolerance:
    """Tests for the REL[:ABS] tolerance syntax"""

    def test_relative_only(self):
        """A single number sets rel_eps and keeps the default floor"""
        tol = parse_tolerance("1e-6")
        assert tol.rel_eps == 1e-6
        assert tol.abs_floor == 1e-12

    def test_relative_and_absolute(self):
        """Both parts are read"""
        tol = parse_tolerance("1e-6:1e-3")
        assert (tol.rel_eps, tol.abs_floor) == (1e-6, 1e-3)

    def test_exact(self):
        """0:0 compares exactly"""
        assert parse_tolerance("0:0").with_scale(100.0).tau == 0.0

    @pytest.mark.parametrize("text", ["", "abc", "1:2:3", "-1", "1e-9:-1"])
    def test_invalid(self, text):
        """Malformed or negative values are rejected"""
        with pytest.raises(ConfigurationError):
            parse_tolerance(text)


class TestSettings:
    """Tests for environment-driven settings"""

    def test_defaults(self, monkeypatch):
        """No environment gives the default tolerance"""
        monkeypatch.delenv("SUBTREE_TOL", raising=False)
        settings = Settings(_env_file=None)
        assert settings.tolerance().rel_eps == 1e-9
        assert settings.bench_sizes == [500, 1000, 2000]

    def test_environment(self, monkeypatch):
        """SUBTREE_TOL and SUBTREE_BENCH_SEEDS are picked up"""
        monkeypatch.setenv("SUBTREE_TOL", "1e-4:1e-6")
        monkeypatch.setenv("SUBTREE_BENCH_SEEDS", "5")
        settings = Settings(_env_file=None)
        assert settings.tolerance().abs_floor == 1e-6
        assert settings.bench_seeds == 5

    def test_override_wins(self, monkeypatch):
        """An explicit --tol beats the environment"""
        monkeypatch.setenv("SUBTREE_TOL", "1e-4")
        settings = Settings(_env_file=None)
        assert settings.tolerance("0:0").rel_eps == 0.0
