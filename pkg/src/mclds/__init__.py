"""Multi-cell cooperative spectrum sensing: MC-LDS fusion, baselines and a network simulator."""
from .config import RULES, ConfigError, ScenarioConfig, parse_config
from .simulator import SimulationResult, run_simulation

__version__ = "0.1.0"

__all__ = ["RULES", "ConfigError", "ScenarioConfig", "SimulationResult", "parse_config",
           "run_simulation", "__version__"]
