"""Tests for parameter schemas and config validation."""

from fractions import Fraction

import pytest

from ..config import ExperimentConfig, ExperimentKind
from ..parameter_schemas import (
    BoolParameter, ChoiceParameter, IntListParameter, IntParameter, RealListParameter, RealParameter,
    get_schema, list_schemas,
)
from ..validation import ParameterValidator, get_validator


class TestParameterSpecs:
    """Test coercion of single parameters."""

    def test_int(self):
        """Test integers, integral floats and digit strings."""
        spec = IntParameter("k", "moments", minimum=1)
        assert spec.coerce(3) == 3
        assert spec.coerce(3.0) == 3
        assert spec.coerce("4") == 4
        with pytest.raises(ValueError, match="integer"):
            spec.coerce(2.5)
        with pytest.raises(ValueError, match="integer"):
            spec.coerce(True)
        with pytest.raises(ValueError, match=">= 1"):
            spec.coerce(0)

    def test_real_keeps_fractions(self):
        """Test 'p/q' strings stay exact."""
        spec = RealParameter("beta", "order", minimum=0.0, exclusive_minimum=True)
        assert spec.coerce("1/2") == Fraction(1, 2)
        assert spec.coerce("0.25") == 0.25
        with pytest.raises(ValueError, match="> 0.0"):
            spec.coerce(0)
        with pytest.raises(ValueError, match="finite"):
            spec.coerce(float("inf"))

    def test_int_list_range(self):
        """Test 'a..b' ranges and scalars."""
        spec = IntListParameter("N", "sizes", minimum=1)
        assert spec.coerce("1..4") == [1, 2, 3, 4]
        assert spec.coerce(5) == [5]
        with pytest.raises(ValueError, match="empty"):
            spec.coerce([])

    def test_real_list(self):
        """Test every entry is bounded."""
        spec = RealListParameter("s", "separations", minimum=0.0, exclusive_minimum=True)
        assert spec.coerce([0.1, "1/2"]) == [0.1, Fraction(1, 2)]
        with pytest.raises(ValueError):
            spec.coerce([0.1, -1.0])

    def test_bool_and_choice(self):
        """Test booleans and normalized choices."""
        assert BoolParameter("flag", "x", False).coerce("TRUE") is True
        with pytest.raises(ValueError):
            BoolParameter("flag", "x", False).coerce(1)
        choice = ChoiceParameter("group", "ensemble", ("unitary", "so-even"))
        assert choice.coerce("SO_EVEN") == "so-even"
        with pytest.raises(ValueError, match="must be one of"):
            choice.coerce("gue")

    def test_describe(self):
        """Test the describe line names type and default."""
        spec = IntParameter("grid_factor", "grid points", 8, minimum=2)
        assert spec.describe() == "grid_factor (integer, default 8): grid points"
        assert "required" in IntParameter("k", "moments").describe()


class TestSchemas:
    """Test the schema table."""

    def test_every_experiment_has_a_schema(self):
        """Test one schema per experiment kind."""
        assert [schema.kind for schema in list_schemas()] == list(ExperimentKind)

    def test_describe_lists_columns(self):
        """Test describe output ends with the CSV columns."""
        text = get_schema(ExperimentKind.MOM_EXACT).describe()
        assert text.startswith("mom-exact:")
        assert text.splitlines()[-1] == "columns: N, value"


class TestParameterValidator:
    """Test whole-config validation."""

    @pytest.fixture
    def validator(self):
        """Create a parameter validator."""
        return ParameterValidator()

    def test_valid_config_fills_defaults(self, validator):
        """Test defaults are resolved and values coerced."""
        config = ExperimentConfig(experiment="field-max", parameters={"N": "8..10"})
        result = validator.validate(config)
        assert result.valid
        assert result.reason == "ok"
        assert result.parameters["N"] == [8, 9, 10]
        assert result.parameters["trials"] == 400
        assert result.parameters["method"] == "verblunsky"

    def test_missing_required(self, validator):
        """Test missing required keys are reported with their path."""
        result = validator.validate(ExperimentConfig(experiment="mom-exact", parameters={"k": 2}))
        assert not result.valid
        assert "parameters.beta: required" in result.errors
        assert "parameters.N: required" in result.errors

    def test_unknown_key(self, validator):
        """Test unknown keys are rejected."""
        config = ExperimentConfig(experiment="secular", parameters={"eta": 1, "m": 1, "N": 2, "size": 3})
        result = validator.validate(config)
        assert "parameters.size: unknown parameter for secular" in result.errors

    def test_range_violation(self, validator):
        """Test documented ranges are enforced."""
        config = ExperimentConfig(experiment="clt", parameters={"N": 10, "trials": 50})
        result = validator.validate(config)
        assert result.errors == ["parameters.trials: must be >= 100"]
        assert result.parameters == {}

    def test_null_means_default(self, validator):
        """Test explicit nulls fall back to the default."""
        config = ExperimentConfig(experiment="zeta-model", parameters={"level": 2, "grid_size": None})
        result = validator.validate(config)
        assert result.valid
        assert result.parameters["grid_size"] is None

    def test_zeta_model_quantity_names_its_rows(self, validator):
        """Test the covariance profile is requested as quantity covariance."""
        config = ExperimentConfig(experiment="zeta-model", parameters={"level": 2, "quantity": "covariance"})
        assert validator.validate(config).valid
        config = ExperimentConfig(experiment="zeta-model", parameters={"level": 2, "quantity": "variance"})
        result = validator.validate(config)
        assert len(result.errors) == 1
        assert result.errors[0].startswith("parameters.quantity: must be one of")

    def test_global_validator(self):
        """Test the global validator is shared."""
        assert get_validator() is get_validator()
