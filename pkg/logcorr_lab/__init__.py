"""logcorr-lab - characteristic polynomials, moments of moments and log-correlated fields."""

__version__ = "0.1.0"

# Import core modules that only need the numerical stack
from .config import get_config
from .config import ExperimentConfig, ExperimentKind, RunnerConfig
from .ensembles import Group

try:
    from .cli import main
    CLI_AVAILABLE = True
except ImportError:
    CLI_AVAILABLE = False

__all__ = [
    "ExperimentConfig",
    "ExperimentKind",
    "Group",
    "RunnerConfig",
    "get_config",
]

if CLI_AVAILABLE:
    __all__.append("main")
