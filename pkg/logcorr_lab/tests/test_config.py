"""Tests for runner and experiment configuration."""

import pytest

from ..config import (
    ExperimentConfig, ExperimentKind, RunnerConfig, flatten_parameters, get_config, set_config,
)


class TestExperimentKind:
    """Test experiment name parsing."""

    def test_from_string(self):
        """Test case and underscores are ignored."""
        assert ExperimentKind.from_string("MOM_EXACT") is ExperimentKind.MOM_EXACT
        assert ExperimentKind.from_string(" field-max ") is ExperimentKind.FIELD_MAX

    def test_unknown(self):
        """Test unknown experiments list the valid names."""
        with pytest.raises(ValueError, match="Unknown experiment"):
            ExperimentKind.from_string("spectral-form-factor")


class TestRunnerConfig:
    """Test runner-wide settings."""

    def test_env_defaults(self, monkeypatch):
        """Test environment variables feed the defaults."""
        monkeypatch.setenv("LOGCORR_THREADS", "3")
        monkeypatch.setenv("LOGCORR_OUTPUT_DIR", "/tmp/out")
        monkeypatch.setenv("LOG_LEVEL", "WARNING")
        config = RunnerConfig.from_env()
        assert config.threads == 3
        assert config.output_dir == "/tmp/out"
        assert config.log_level == "WARNING"

    def test_invalid_threads(self):
        """Test threads must be positive."""
        with pytest.raises(ValueError, match="threads"):
            RunnerConfig(threads=0)

    def test_missing_file_gives_defaults(self, tmp_path):
        """Test a missing runner file is not an error."""
        config = RunnerConfig.load_from_file(str(tmp_path / "absent.yaml"))
        assert config.block_size == 64

    def test_load_runner_section(self, tmp_path):
        """Test the runner: section is read."""
        path = tmp_path / "runner.yaml"
        path.write_text("runner:\n  threads: 2\n  block_size: 16\n")
        config = RunnerConfig.load_from_file(str(path))
        assert config.threads == 2
        assert config.block_size == 16

    def test_unknown_runner_key(self, tmp_path):
        """Test unknown runner keys are rejected."""
        path = tmp_path / "runner.yaml"
        path.write_text("runner:\n  workers: 2\n")
        with pytest.raises(ValueError, match="Unknown runner keys"):
            RunnerConfig.load_from_file(str(path))

    def test_global_config(self):
        """Test set_config replaces the global instance."""
        original = get_config()
        try:
            replacement = RunnerConfig(threads=1)
            set_config(replacement)
            assert get_config() is replacement
        finally:
            set_config(original)


class TestExperimentConfig:
    """Test experiment configs."""

    def test_from_yaml(self):
        """Test a typical config."""
        config = ExperimentConfig.from_yaml("experiment: mom-exact\nparameters:\n  k: 2\n  beta: 1\nseed: 7\n")
        assert config.experiment is ExperimentKind.MOM_EXACT
        assert config.parameters == {"k": 2, "beta": 1}
        assert config.seed == 7

    def test_nested_parameters_flattened(self):
        """Test nested mappings become dotted keys."""
        assert flatten_parameters({"a": {"b": 1, "c": {"d": 2}}, "e": 3}) == {"a.b": 1, "a.c.d": 2, "e": 3}

    def test_missing_experiment(self):
        """Test the experiment key is required."""
        with pytest.raises(ValueError, match="missing the 'experiment' key"):
            ExperimentConfig.from_dict({"seed": 1})

    def test_unknown_top_level_key(self):
        """Test unknown top-level keys are rejected."""
        with pytest.raises(ValueError, match="Unknown top-level"):
            ExperimentConfig.from_dict({"experiment": "clt", "params": {}})

    @pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5, True])
    def test_invalid_seed(self, seed):
        """Test seeds outside [0, 2^64) or of the wrong type."""
        with pytest.raises(ValueError, match="seed"):
            ExperimentConfig(experiment=ExperimentKind.CLT, seed=seed)

    def test_not_a_mapping(self):
        """Test a YAML list is refused."""
        with pytest.raises(ValueError, match="mapping"):
            ExperimentConfig.from_yaml("- 1\n- 2\n")

    def test_yaml_round_trip(self):
        """Test to_yaml and from_yaml agree."""
        config = ExperimentConfig(experiment="secular", parameters={"eta": 1, "m": 2, "N": [3]}, seed=5,
                                  output_path="out")
        assert ExperimentConfig.from_yaml(config.to_yaml()) == config

    def test_missing_file(self, tmp_path):
        """Test a missing experiment file raises."""
        with pytest.raises(FileNotFoundError):
            ExperimentConfig.load_from_file(str(tmp_path / "absent.yaml"))
