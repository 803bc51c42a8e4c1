"""Random small-cell deployments on a square service area.

Cell sites form a binomial point process: the number of cells is fixed by
the requested density and the per-cell coverage footprint, positions are
drawn uniformly over the square.  Each cell is then binned into one of
``n_branches`` equal angular sectors around the hub.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig

# guards the floor() against products like 0.6 * 490000 / 400 landing one
# float ulp below the exact integer
_COUNT_EPS = 1e-9

_TWO_PI = 2.0 * math.pi

# footprint radius for the documented default 400 m2 coverage area
_DEFAULT_RADIUS_M = math.sqrt(400.0 / math.pi)


@dataclass
class Cell:
    id: int
    x_m: float
    y_m: float
    radius_m: float
    sector: int = -1  # -1 until assign_sectors runs


@dataclass
class CellDeployment:
    cells: list[Cell] = field(default_factory=list)
    hub_x_m: float = math.nan
    hub_y_m: float = math.nan
    config: SimulationConfig | None = None


def cell_count(density: float, side_m: float, cell_area_m2: float) -> int:
    """Deterministic cell count: floor(density * side^2 / cell_area)."""
    raw = density * side_m * side_m / cell_area_m2
    return int(math.floor(raw + _COUNT_EPS))


def place_cells(
    count: int,
    side_m: float,
    rng: np.random.Generator,
    radius_m: float = _DEFAULT_RADIUS_M,
) -> CellDeployment:
    """Scatter `count` cells uniformly on [0, side_m]^2 (sectors unassigned)."""
    xs = rng.uniform(0.0, side_m, size=count)
    ys = rng.uniform(0.0, side_m, size=count)
    cells = [
        Cell(id=i, x_m=float(xs[i]), y_m=float(ys[i]), radius_m=radius_m)
        for i in range(count)
    ]
    return CellDeployment(cells=cells)


def place_hub(config: SimulationConfig, rng: np.random.Generator) -> tuple[float, float]:
    """Hub coordinates: square center, or uniform-random when configured."""
    if config.hub_mode == "center":
        return config.side_m / 2.0, config.side_m / 2.0
    x = float(rng.uniform(0.0, config.side_m))
    y = float(rng.uniform(0.0, config.side_m))
    return x, y


def assign_sectors(
    deployment: CellDeployment,
    n_branches: int,
    anchor_rad: float = 0.0,
) -> CellDeployment:
    """Bin every cell into a half-open angular sector about the hub.

    Sector k covers angles [anchor + k*w, anchor + (k+1)*w) with
    w = 2*pi/n_branches; a cell exactly on the hub gets sector 0.
    """
    width = _TWO_PI / n_branches
    for cell in deployment.cells:
        dx = cell.x_m - deployment.hub_x_m
        dy = cell.y_m - deployment.hub_y_m
        if dx == 0.0 and dy == 0.0:
            cell.sector = 0
            continue
        theta = (math.atan2(dy, dx) - anchor_rad) % _TWO_PI
        k = int(theta / width)
        # float division can round exactly up to n_branches when theta
        # sits one ulp below 2*pi
        cell.sector = min(k, n_branches - 1)
    return deployment


def deploy(config: SimulationConfig, rng: np.random.Generator) -> CellDeployment:
    """Full deployment pipeline: hub, cells, sector assignment."""
    hub_x, hub_y = place_hub(config, rng)
    n = cell_count(config.density, config.side_m, config.cell_area_m2)
    radius = math.sqrt(config.cell_area_m2 / math.pi)
    deployment = place_cells(n, config.side_m, rng, radius_m=radius)
    deployment.hub_x_m = hub_x
    deployment.hub_y_m = hub_y
    deployment.config = config
    assign_sectors(deployment, config.n_branches, config.sector_anchor_rad)
    return deployment
