"""Monte Carlo driver: replications, rate aggregation, sweep statistics.

A replication is one random scenario end to end: drop cells, synthesize
the feeder grid, flag served cells, generate every cell's sessions, then
accumulate per-step aggregate rates at the hub and per branch.  Session
rate contributions are prorated exactly over the time steps they overlap.

All randomness flows from one integer seed per replication; sweep
replications derive their seeds positionally from (master seed, density
index, topology index, replication index) so any single sweep cell can be
reproduced in isolation.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .deployment import deploy
from .gridgen import PowerGrid, build_grid, mark_served, reachability_fraction
from .traffic import Session, TrafficModel, _cell_stream

_MASK64 = (1 << 64) - 1


@dataclass
class SessionSet:
    """Column-oriented session store, sorted by (cell id, start time)."""

    cell_id: np.ndarray
    is_data: np.ndarray
    start_s: np.ndarray
    duration_s: np.ndarray
    rate_bps: np.ndarray

    @classmethod
    def empty(cls) -> "SessionSet":
        return cls(
            np.empty(0, dtype=int),
            np.empty(0, dtype=bool),
            np.empty(0),
            np.empty(0),
            np.empty(0),
        )

    @classmethod
    def from_sessions(cls, sessions: list[Session]) -> "SessionSet":
        ordered = sorted(sessions, key=lambda s: (s.cell_id, s.start_s))
        return cls(
            np.array([s.cell_id for s in ordered], dtype=int),
            np.array([s.kind == "data" for s in ordered], dtype=bool),
            np.array([s.start_s for s in ordered]),
            np.array([s.duration_s for s in ordered]),
            np.array([s.rate_bps for s in ordered]),
        )

    def to_sessions(self) -> list[Session]:
        return [
            Session(
                int(self.cell_id[i]),
                "data" if self.is_data[i] else "voice",
                float(self.start_s[i]),
                float(self.duration_s[i]),
                float(self.rate_bps[i]),
            )
            for i in range(self.cell_id.size)
        ]

    def subset(self, mask: np.ndarray) -> "SessionSet":
        return SessionSet(
            self.cell_id[mask],
            self.is_data[mask],
            self.start_s[mask],
            self.duration_s[mask],
            self.rate_bps[mask],
        )


@dataclass
class RateSeries:
    dt_s: float
    hub: np.ndarray  # (steps,) aggregate bps at the hub
    branches: np.ndarray  # (n_branches, steps)


@dataclass
class MetricsReport:
    seed: int | None = None
    reachability: float | None = None
    avg_rate_bps: float = 0.0
    max_rate_bps: float = 0.0
    mean_wait_s: float | None = None
    per_cell_mean_wait_s: float | None = None
    per_branch_avg_bps: list[float] = field(default_factory=list)
    forced_crossings: int = 0
    offered_avg_rate_bps: float | None = None
    config: SimulationConfig | None = None


@dataclass
class SweepRow:
    density: float
    topology: str
    replications: int
    reachability_mean: float | None
    reachability_stderr: float | None
    avg_rate_bps_mean: float | None
    avg_rate_bps_stderr: float | None
    max_rate_bps_mean: float | None
    max_rate_bps_stderr: float | None
    mean_wait_s_mean: float | None
    mean_wait_s_stderr: float | None
    forced_crossings_mean: float | None
    forced_crossings_stderr: float | None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    densities: list[float]
    topologies: list[str]
    replications: int
    master_seed: int


# ---------------------------------------------------------------------------
# seed derivation

def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D49BDB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64

def derive_seed(
    master_seed: int, density_index: int, topology_index: int, rep_index: int
) -> int:
    """Positional counter scheme: one splitmix64 round per index component.

    The derived seed depends only on the three indices, never on execution
    order, so sweep cells can run in any order or in isolation.
    """
    x = master_seed & _MASK64
    for component in (density_index, topology_index, rep_index):
        x = _splitmix64(x ^ (component & _MASK64))
    return x


# ---------------------------------------------------------------------------
# traffic generation and aggregation

def generate_traffic(
    rng: np.random.Generator,
    model: TrafficModel,
    cell_ids: list[int],
    horizon_s: float,
) -> SessionSet:
    """Sessions for every cell (served or not), cells drawn in id order."""
    cols: list[tuple[np.ndarray, ...]] = []
    for cid in sorted(cell_ids):
        starts, is_data, durations, rates = _cell_stream(rng, model, horizon_s)
        if starts.size:
            cols.append((np.full(starts.size, cid), is_data, starts, durations, rates))
    if not cols:
        return SessionSet.empty()
    return SessionSet(
        np.concatenate([c[0] for c in cols]).astype(int),
        np.concatenate([c[1] for c in cols]),
        np.concatenate([c[2] for c in cols]),
        np.concatenate([c[3] for c in cols]),
        np.concatenate([c[4] for c in cols]),
    )


def _step_count(horizon_s: float, dt_s: float) -> int:
    ratio = horizon_s / dt_s
    if abs(ratio - round(ratio)) < 1e-9:
        return max(int(round(ratio)), 1)
    return max(int(math.ceil(ratio)), 1)


def _coerce(sessions) -> SessionSet:
    if isinstance(sessions, SessionSet):
        return sessions
    return SessionSet.from_sessions(list(sessions))


def aggregate_rate_series(
    sessions,
    grid: PowerGrid,
    dt_s: float,
    horizon_s: float,
    include_unserved: bool = False,
) -> RateSeries:
    """Accumulate aggregate rate per time step at the hub and per branch.

    A session holding rate r over [start, start+duration), clipped at the
    horizon, adds r weighted by its fractional overlap with each step.
    Sessions of unserved cells contribute nothing unless include_unserved
    is set (the offered-load view).
    """
    ss = _coerce(sessions)
    steps = _step_count(horizon_s, dt_s)
    nb = grid.n_branches
    width = steps + 2

    if ss.cell_id.size:
        n_cells = max(grid.branch_of, default=-1) + 1
        branch_lut = np.zeros(n_cells + 1, dtype=int)
        served_lut = np.zeros(n_cells + 1, dtype=bool)
        for cid, b in grid.branch_of.items():
            branch_lut[cid] = b
        for cid, s in grid.served.items():
            served_lut[cid] = s
        keep = (
            np.ones(ss.cell_id.size, dtype=bool)
            if include_unserved
            else served_lut[ss.cell_id]
        )
        # sessions must start inside the observation window
        keep &= (ss.start_s >= 0.0) & (ss.start_s < horizon_s)
        kept = ss.subset(keep)
    else:
        kept = ss

    if kept.cell_id.size == 0:
        return RateSeries(dt_s, np.zeros(steps), np.zeros((nb, steps)))

    a = kept.start_s / dt_s
    b = np.minimum(kept.start_s + kept.duration_s, horizon_s) / dt_s
    ia = np.floor(a).astype(np.int64)
    ib = np.floor(b).astype(np.int64)
    fa = a - ia
    fb = b - ib
    w = kept.rate_bps

    idx = np.concatenate([ia, ia + 1, ib, ib + 1])
    val = np.concatenate([w * (1.0 - fa), w * fa, -w * (1.0 - fb), -w * fb])

    hub_diff = np.bincount(idx, weights=val, minlength=width)
    hub = np.cumsum(hub_diff)[:steps]

    branch = branch_lut[kept.cell_id]
    flat = np.concatenate([branch, branch, branch, branch]) * width + idx
    branch_diff = np.bincount(flat, weights=val, minlength=nb * width)
    branches = np.cumsum(branch_diff.reshape(nb, width), axis=1)[:, :steps]

    return RateSeries(dt_s, hub, branches)


# ---------------------------------------------------------------------------
# metrics

def _pooled_waits(ss: SessionSet, served_lut: np.ndarray) -> tuple[float | None, float | None]:
    """Mean inter-arrival gap pooled over served cells, and the mean of
    per-cell mean gaps."""
    if ss.cell_id.size < 2:
        return None, None
    same = (ss.cell_id[1:] == ss.cell_id[:-1]) & served_lut[ss.cell_id[1:]]
    if not same.any():
        return None, None
    gaps = (ss.start_s[1:] - ss.start_s[:-1])[same]
    owners = ss.cell_id[1:][same]
    pooled = float(gaps.mean())
    _, inverse = np.unique(owners, return_inverse=True)
    sums = np.bincount(inverse, weights=gaps)
    counts = np.bincount(inverse)
    per_cell = float((sums / counts).mean())
    return pooled, per_cell


def compute_metrics(
    series: RateSeries,
    grid: PowerGrid,
    sessions,
    config: SimulationConfig | None = None,
    seed: int | None = None,
) -> MetricsReport:
    ss = _coerce(sessions)
    n_cells = max(grid.branch_of, default=-1) + 1
    served_lut = np.zeros(n_cells + 1, dtype=bool)
    for cid, s in grid.served.items():
        served_lut[cid] = s
    pooled, per_cell = _pooled_waits(ss, served_lut)
    return MetricsReport(
        seed=seed,
        reachability=reachability_fraction(grid),
        avg_rate_bps=float(series.hub.mean()),
        max_rate_bps=float(series.hub.max()),
        mean_wait_s=pooled,
        per_cell_mean_wait_s=per_cell,
        per_branch_avg_bps=[float(v) for v in series.branches.mean(axis=1)],
        forced_crossings=grid.forced_crossings,
        config=config,
    )


# ---------------------------------------------------------------------------
# replication and sweep

def run_replication(config: SimulationConfig, seed: int) -> MetricsReport:
    """One full scenario draw under the given seed."""
    config.validate()
    rng = np.random.default_rng(seed)
    deployment = deploy(config, rng)
    grid = build_grid(deployment, config)
    mark_served(grid, config.max_wire_m, config.max_cells_per_branch)
    model = TrafficModel.from_config(config)
    sessions = generate_traffic(
        rng, model, [c.id for c in deployment.cells], config.horizon_s
    )
    series = aggregate_rate_series(sessions, grid, config.dt_s, config.horizon_s)
    report = compute_metrics(series, grid, sessions, config=config, seed=seed)
    if config.count_unserved_offered:
        offered = aggregate_rate_series(
            sessions, grid, config.dt_s, config.horizon_s, include_unserved=True
        )
        report.offered_avg_rate_bps = float(offered.hub.mean())
    return report


def _mean_stderr(values: list[float | None]) -> tuple[float | None, float | None]:
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    mean = float(np.mean(present))
    if len(present) < 2:
        return mean, None
    return mean, float(np.std(present, ddof=1) / math.sqrt(len(present)))


def _summarize(
    density: float, topology: str, reports: list[MetricsReport]
) -> SweepRow:
    reach = _mean_stderr([r.reachability for r in reports])
    avg = _mean_stderr([r.avg_rate_bps for r in reports])
    peak = _mean_stderr([r.max_rate_bps for r in reports])
    wait = _mean_stderr([r.mean_wait_s for r in reports])
    forced = _mean_stderr([float(r.forced_crossings) for r in reports])
    return SweepRow(
        density,
        topology,
        len(reports),
        reach[0],
        reach[1],
        avg[0],
        avg[1],
        peak[0],
        peak[1],
        wait[0],
        wait[1],
        forced[0],
        forced[1],
    )


def run_sweep(
    config: SimulationConfig,
    densities: list[float],
    topologies: list[str],
    replications: int,
    master_seed: int | None = None,
) -> SweepResult:
    """Replicated grid of scenarios over densities x topologies.

    Each cell's replication seeds come from derive_seed, so results do not
    depend on the order cells are executed in.
    """
    master = config.master_seed if master_seed is None else master_seed
    rows = []
    for i, density in enumerate(densities):
        for j, topology in enumerate(topologies):
            scenario = dataclasses.replace(config, density=density, topology=topology)
            reports = [
                run_replication(scenario, derive_seed(master, i, j, k))
                for k in range(replications)
            ]
            rows.append(_summarize(density, topology, reports))
    return SweepResult(rows, list(densities), list(topologies), replications, master)
