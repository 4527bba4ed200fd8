"""Configuration management for logcorr-lab runs."""

import os
import yaml
from pathlib import Path
from typing import Any, Dict, Optional
from dataclasses import dataclass, field, fields
from dotenv import load_dotenv
from enum import Enum

# Load environment variables
load_dotenv()

MAX_SEED = 2 ** 64


class ExperimentKind(Enum):
    """Experiments the runner can dispatch."""
    FIELD_MAX = "field-max"
    CLT = "clt"
    PAIR_CORRELATION = "pair-correlation"
    COVARIANCE = "covariance"
    MOM_EXACT = "mom-exact"
    MOM_TOEPLITZ = "mom-toeplitz"
    MOM_MC = "mom-mc"
    MOM_POLY = "mom-poly"
    BRANCHING_MOM = "branching-mom"
    BRANCHING_MAX = "branching-max"
    FREEZING = "freezing"
    ZETA_MODEL = "zeta-model"
    CLOSED_FORM = "closed-form"
    SECULAR = "secular"

    @classmethod
    def from_string(cls, value: str) -> 'ExperimentKind':
        """Create ExperimentKind from string; underscores and case are ignored."""
        try:
            return cls(value.strip().lower().replace('_', '-'))
        except ValueError:
            raise ValueError(f"Unknown experiment: {value}. Valid: {[k.value for k in cls]}")


def _default_threads() -> int:
    return int(os.getenv('LOGCORR_THREADS', str(os.cpu_count() or 1)))


@dataclass
class RunnerConfig:
    """Runner-wide settings (parallelism, output location, resource caps)."""
    threads: int = field(default_factory=_default_threads)
    output_dir: str = field(default_factory=lambda: os.getenv('LOGCORR_OUTPUT_DIR', 'results'))
    max_leaves_log2: int = field(default_factory=lambda: int(os.getenv('LOGCORR_MAX_DEPTH', '26')))
    block_size: int = 64
    debug: bool = field(default_factory=lambda: os.getenv('DEBUG', 'false').lower() == 'true')
    log_level: str = field(default_factory=lambda: os.getenv('LOG_LEVEL', 'INFO'))

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")

    @classmethod
    def from_env(cls) -> 'RunnerConfig':
        """Create runner config from environment variables."""
        return cls()

    @classmethod
    def load_from_file(cls, config_path: Optional[str] = None) -> 'RunnerConfig':
        """Load the `runner:` section of a YAML file; missing file gives defaults."""
        if config_path is None:
            config_path = os.getenv('LOGCORR_CONFIG', 'logcorr_lab.yaml')

        config_file = Path(config_path)
        if not config_file.exists():
            return cls()

        with open(config_file, 'r') as f:
            data = yaml.safe_load(f) or {}

        section = data.get('runner') or {}
        unknown = set(section) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"Unknown runner keys: {sorted(unknown)}")
        return cls(**section)


def flatten_parameters(mapping: Dict[str, Any], prefix: str = '') -> Dict[str, Any]:
    """Flatten nested mappings into dotted keys: {'a': {'b': 1}} -> {'a.b': 1}."""
    flat: Dict[str, Any] = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_parameters(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


@dataclass
class ExperimentConfig:
    """One experiment: its kind, flat parameter map, master seed and output location."""
    experiment: ExperimentKind
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_path: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.experiment, str):
            self.experiment = ExperimentKind.from_string(self.experiment)
        self.parameters = flatten_parameters(dict(self.parameters or {}))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        if 'experiment' not in data:
            raise ValueError("Config is missing the 'experiment' key")
        unknown = set(data) - {'experiment', 'parameters', 'seed', 'output_path', 'runner'}
        if unknown:
            raise ValueError(f"Unknown top-level config keys: {sorted(unknown)}")
        return cls(
            experiment=data['experiment'],
            parameters=data.get('parameters') or {},
            seed=data.get('seed', 0),
            output_path=data.get('output_path'),
        )

    @classmethod
    def from_yaml(cls, text: str) -> 'ExperimentConfig':
        data = yaml.safe_load(text)
        if not isinstance(data, dict):
            raise ValueError("Experiment config must be a YAML mapping")
        return cls.from_dict(data)

    @classmethod
    def load_from_file(cls, config_path: str) -> 'ExperimentConfig':
        """Load an experiment config from a YAML file."""
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")
        with open(config_file, 'r') as f:
            return cls.from_yaml(f.read())

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'experiment': self.experiment.value,
            'parameters': dict(self.parameters),
            'seed': self.seed,
        }
        if self.output_path is not None:
            data['output_path'] = self.output_path
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


# Global config instance
config = RunnerConfig()


def get_config() -> RunnerConfig:
    """Get the global runner configuration instance."""
    return config


def set_config(new_config: RunnerConfig) -> None:
    """Replace the global runner configuration (CLI overrides)."""
    global config
    config = new_config
