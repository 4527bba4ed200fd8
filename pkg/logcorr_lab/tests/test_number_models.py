"""Tests for the randomized zeta model and the arithmetic helpers."""

import math

import numpy as np
import pytest

from ..errors import BudgetExceededError
from ..number_models import (
    ModelConfig, ModelVariant, dirichlet_character_minus3, elliptic_ap, fundamental_discriminants,
    increment_covariance, increment_covariance_sum, kronecker_symbol, model_covariance, model_field_batch,
    model_increments, model_max_experiment, model_max_report, model_variance, prime_sieve, zeta, zeta_eval,
    zeta_interval_max,
)


@pytest.fixture
def rng():
    """Fixed generator so failures are reproducible."""
    return np.random.default_rng(1729)


class TestPrimeSieve:
    """Test the segmented sieve."""

    def test_small(self):
        """Test π(100) = 25."""
        table = prime_sieve(100)
        assert len(table) == 25
        assert 97 in table
        assert 91 not in table
        assert table.count_up_to(10) == 4

    def test_million(self):
        """Test π(10^6) = 78498 across several segments."""
        assert len(prime_sieve(10 ** 6)) == 78498

    def test_below_two(self):
        """Test limits below 2 give no primes."""
        assert len(prime_sieve(1)) == 0

    def test_budget(self):
        """Test the sieve limit is capped."""
        with pytest.raises(BudgetExceededError):
            prime_sieve(10 ** 10)


class TestModelConfig:
    """Test zeta model configuration."""

    def test_defaults(self):
        """Test the default grid is 8·2^n points."""
        cfg = ModelConfig(level=2)
        assert cfg.grid_size == 32
        assert cfg.prime_limit == 54
        assert cfg.log_log_T == pytest.approx(2 * math.log(2))

    def test_level_budget(self):
        """Test levels beyond the prime budget are refused."""
        with pytest.raises(BudgetExceededError):
            ModelConfig(level=5)

    def test_grid_too_small(self):
        """Test the grid needs at least 2^n points."""
        with pytest.raises(ValueError, match="grid_size"):
            ModelConfig(level=3, grid_size=4)

    def test_variant_from_string(self):
        """Test variant parsing."""
        assert ModelVariant.from_string("Gaussian") is ModelVariant.GAUSSIAN
        with pytest.raises(ValueError, match="Unknown model variant"):
            ModelVariant.from_string("rademacher")


class TestModelField:
    """Test the randomized model field."""

    @pytest.mark.parametrize("variant", [ModelVariant.STEINHAUS, ModelVariant.GAUSSIAN])
    def test_variance(self, rng, variant):
        """Test the sampled variance matches ½ Σ 1/p."""
        cfg = ModelConfig(level=2, variant=variant)
        fields = model_field_batch(cfg, 8000, rng)
        assert fields.shape == (8000, cfg.grid_size)
        assert fields[:, 0].var() == pytest.approx(model_variance(cfg), rel=0.06)

    def test_covariance_decays(self):
        """Test the covariance is largest on the diagonal."""
        cfg = ModelConfig(level=3)
        assert model_covariance(cfg, 0.0, 0.5) < model_variance(cfg)
        assert model_covariance(cfg, 0.1, 0.3) == pytest.approx(model_covariance(cfg, 0.0, 0.2))

    def test_second_order_adds_variance(self):
        """Test the p^{-2ih} terms raise the variance."""
        first = ModelConfig(level=2)
        second = ModelConfig(level=2, second_order=True)
        assert model_variance(second) > model_variance(first)

    def test_increments_sum_to_field(self):
        """Test Y_1 + ... + Y_n = X for the same draws."""
        cfg = ModelConfig(level=3)
        increments = model_increments(cfg, 4, np.random.default_rng(5))
        fields = model_field_batch(cfg, 4, np.random.default_rng(5))
        assert increments.shape == (4, 3, cfg.grid_size)
        np.testing.assert_allclose(increments.sum(axis=1), fields, atol=1e-10)

    def test_increment_variance(self):
        """Test the increment variance tends to ½ log 2."""
        assert increment_covariance_sum(4) == pytest.approx(0.5 * math.log(2), abs=0.02)

    def test_increment_decorrelation(self):
        """Test increments decorrelate once |Δ| exceeds 2^{-m}."""
        assert abs(increment_covariance(4, 1.0)) < increment_covariance(4, 1 / 16)
        assert increment_covariance(4, 0.0) == pytest.approx(increment_covariance_sum(4))

    def test_increment_level_checks(self):
        """Test increment levels are bounded."""
        with pytest.raises(ValueError):
            increment_covariance_sum(0)
        with pytest.raises(BudgetExceededError):
            increment_covariance(5, 0.1)


class TestModelMax:
    """Test the model maximum report."""

    def test_report(self):
        """Test leading and corrected predictions."""
        cfg = ModelConfig(level=3)
        report = model_max_report(cfg, np.array([1.0, 2.0, 3.0]))
        leading = 3 * math.log(2)
        assert report.leading == pytest.approx(leading)
        assert report.corrected == pytest.approx(leading - 0.75 * math.log(leading))
        assert report.ratio == pytest.approx(2.0 / leading)
        assert report.as_dict()["level"] == 3

    def test_experiment(self, rng):
        """Test the mean maximum is positive and below the leading order plus one."""
        report = model_max_experiment(ModelConfig(level=3), 200, rng)
        assert 0.0 < report.mean_max.mean < report.leading + 1.0

    def test_experiment_trials(self, rng):
        """Test fewer than 200 trials is an error."""
        with pytest.raises(ValueError):
            model_max_experiment(ModelConfig(level=2), 10, rng)


class TestArithmetic:
    """Test characters, discriminants and elliptic curve counts."""

    def test_kronecker(self):
        """Test (-3/5) = -1 and small values of χ_{-3}."""
        assert kronecker_symbol(-3, 5) == -1
        assert kronecker_symbol(-3, 7) == 1
        assert [dirichlet_character_minus3(n) for n in range(1, 7)] == [1, -1, 0, 1, -1, 0]

    def test_kronecker_zero(self):
        """Test (d/0) is 1 only for d = ±1."""
        assert kronecker_symbol(1, 0) == 1
        assert kronecker_symbol(5, 0) == 0

    def test_fundamental_discriminants(self):
        """Test the positive and negative lists."""
        assert fundamental_discriminants(1, 21) == [1, 5, 8, 12, 13, 17, 21]
        assert fundamental_discriminants(-8, -1) == [-8, -7, -4, -3]

    def test_elliptic_ap(self):
        """Test a_5 for y² = x³ + 1 and the Hasse bound."""
        assert elliptic_ap(0, 1, 5) == 1
        for p in (7, 11, 13, 101):
            assert abs(elliptic_ap(0, 1, p)) <= 2 * math.sqrt(p)

    def test_elliptic_bad_prime(self):
        """Test primes dividing the discriminant are refused."""
        with pytest.raises(ValueError, match="Bad prime"):
            elliptic_ap(0, 1, 3)
        with pytest.raises(ValueError, match="prime"):
            elliptic_ap(0, 1, 9)


class TestZeta:
    """Test ζ by Euler-Maclaurin."""

    def test_special_values(self):
        """Test ζ(2) = π²/6 and ζ(1/2)."""
        assert zeta(2).real == pytest.approx(math.pi ** 2 / 6, abs=1e-10)
        assert zeta(0.5).real == pytest.approx(-1.4603545, abs=1e-7)

    def test_pole(self):
        """Test s = 1 is refused."""
        with pytest.raises(ValueError, match="pole"):
            zeta(1)

    def test_first_zero(self):
        """Test |ζ(1/2 + it)| nearly vanishes at the first zero."""
        assert abs(zeta_eval(14.134725141734695)) < 1e-6

    def test_interval_max(self):
        """Test the maximizer lies in the window."""
        h, value = zeta_interval_max(100.0, 1.0)
        assert 0.0 <= h <= 1.0
        assert math.isfinite(value)

    def test_interval_checks(self):
        """Test t0 and grid lower bounds."""
        with pytest.raises(ValueError):
            zeta_interval_max(2.0, 1.0)
        with pytest.raises(ValueError, match="grid"):
            zeta_interval_max(100.0, 1.0, grid=2)
