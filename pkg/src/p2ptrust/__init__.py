"""Trust-aware, community-forming search over an unstructured peer-to-peer overlay."""

from .config import SimConfig, build_config
from .engine import GenerationResult, Simulation, run_experiment
from .errors import ConfigError, ParameterError, ProtocolViolation

__all__ = [
    "ConfigError",
    "GenerationResult",
    "ParameterError",
    "ProtocolViolation",
    "SimConfig",
    "Simulation",
    "build_config",
    "run_experiment",
]

__version__ = "0.1.0"
