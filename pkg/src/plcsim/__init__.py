"""Monte Carlo feasibility study of power-line front-haul for small cells."""

__version__ = "0.1.0"

from .config import SimulationConfig
from .deployment import Cell, CellDeployment, deploy
from .errors import ConfigError, FitError, GeometryError
from .gridgen import PowerGrid, build_grid, mark_served, reachability_fraction
from .simulator import (
    MetricsReport,
    RateSeries,
    SessionSet,
    SweepResult,
    derive_seed,
    run_replication,
    run_sweep,
)
from .traffic import Session, TrafficModel

__all__ = [
    "Cell",
    "CellDeployment",
    "ConfigError",
    "FitError",
    "GeometryError",
    "MetricsReport",
    "PowerGrid",
    "RateSeries",
    "Session",
    "SessionSet",
    "SimulationConfig",
    "SweepResult",
    "TrafficModel",
    "build_grid",
    "deploy",
    "derive_seed",
    "mark_served",
    "reachability_fraction",
    "run_replication",
    "run_sweep",
    "__version__",
]
