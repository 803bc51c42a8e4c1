"""Synthesis of low-voltage feeder grids over a cell deployment.

Each angular sector gets its own feeder subgraph rooted at the hub, built
under one of three wiring disciplines:

* ``bus``   -- a straight spine along the sector bisector with
               perpendicular service drops,
* ``tree``  -- nearest-neighbour accretion (every new cell wires to the
               closest already-connected node),
* ``chain`` -- a serpentine that walks cell to cell, branching only when
               the next hop would cross an existing wire.

Wire distance to the hub, not Euclidean distance, decides whether a cell
can be served.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .deployment import Cell, CellDeployment
from .errors import GeometryError

Point = tuple[float, float]


@dataclass
class GridNode:
    id: int
    x_m: float
    y_m: float
    kind: str  # "hub" | "cell" | "junction"
    cell_id: int | None = None
    sector: int | None = None


@dataclass
class GridEdge:
    a: int
    b: int
    length_m: float


@dataclass
class PowerGrid:
    nodes: list[GridNode] = field(default_factory=list)
    edges: list[GridEdge] = field(default_factory=list)
    hub_node: int = 0
    n_branches: int = 1
    wire_distance_m: dict[int, float] = field(default_factory=dict)
    branch_of: dict[int, int] = field(default_factory=dict)
    served: dict[int, bool] = field(default_factory=dict)
    forced_crossings: int = 0


# ---------------------------------------------------------------------------
# segment intersection

def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    """Signed area cross product of (b - a) x (c - a)."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _in_box(px, py, ax, ay, bx, by) -> bool:
    """Point within the bounding box of segment ab (caller knows collinear)."""
    return (
        min(ax, bx) <= px <= max(ax, bx)
        and min(ay, by) <= py <= max(ay, by)
    )


def segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True iff the closed segments share a point that is not a common endpoint.

    Two wires that merely meet at a shared junction endpoint do not count
    as crossing; any other contact (proper crossing, T-contact, collinear
    overlap) does.  Zero-length segments are rejected.
    """
    if p1 == p2 or q1 == q2:
        raise GeometryError("degenerate segment: endpoints coincide")

    p1x, p1y = p1
    p2x, p2y = p2
    q1x, q1y = q1
    q2x, q2y = q2

    d1 = _orient(q1x, q1y, q2x, q2y, p1x, p1y)
    d2 = _orient(q1x, q1y, q2x, q2y, p2x, p2y)
    d3 = _orient(p1x, p1y, p2x, p2y, q1x, q1y)
    d4 = _orient(p1x, p1y, p2x, p2y, q2x, q2y)

    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True

    if {p1, p2} == {q1, q2}:
        return True  # identical segments overlap everywhere

    p_ends = (p1, p2)
    q_ends = (q1, q2)
    contacts = set()
    if d1 == 0 and _in_box(p1x, p1y, q1x, q1y, q2x, q2y):
        contacts.add(p1)
    if d2 == 0 and _in_box(p2x, p2y, q1x, q1y, q2x, q2y):
        contacts.add(p2)
    if d3 == 0 and _in_box(q1x, q1y, p1x, p1y, p2x, p2y):
        contacts.add(q1)
    if d4 == 0 and _in_box(q2x, q2y, p1x, p1y, p2x, p2y):
        contacts.add(q2)

    for pt in contacts:
        if not (pt in p_ends and pt in q_ends):
            return True
    return False


def _crosses_any(
    sx: float,
    sy: float,
    tx: float,
    ty: float,
    ea: np.ndarray,
    eb: np.ndarray,
) -> bool:
    """Vectorised segments_intersect of segment (s, t) against edge arrays.

    Matches the scalar semantics exactly, including the shared-endpoint
    exemption; used on the chain-construction hot path.
    """
    ax = ea[:, 0]
    ay = ea[:, 1]
    bx = eb[:, 0]
    by = eb[:, 1]

    abx = bx - ax
    aby = by - ay
    d1 = abx * (sy - ay) - aby * (sx - ax)
    d2 = abx * (ty - ay) - aby * (tx - ax)
    stx = tx - sx
    sty = ty - sy
    d3 = stx * (ay - sy) - sty * (ax - sx)
    d4 = stx * (by - sy) - sty * (bx - sx)

    proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
        ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
    )
    if proper.any():
        return True

    s_is_a = (sx == ax) & (sy == ay)
    s_is_b = (sx == bx) & (sy == by)
    t_is_a = (tx == ax) & (ty == ay)
    t_is_b = (tx == bx) & (ty == by)

    lo_x = np.minimum(ax, bx)
    hi_x = np.maximum(ax, bx)
    lo_y = np.minimum(ay, by)
    hi_y = np.maximum(ay, by)
    touch = (d1 == 0) & (lo_x <= sx) & (sx <= hi_x) & (lo_y <= sy) & (sy <= hi_y) & ~(
        s_is_a | s_is_b
    )
    touch |= (d2 == 0) & (lo_x <= tx) & (tx <= hi_x) & (lo_y <= ty) & (ty <= hi_y) & ~(
        t_is_a | t_is_b
    )

    st_lo_x = min(sx, tx)
    st_hi_x = max(sx, tx)
    st_lo_y = min(sy, ty)
    st_hi_y = max(sy, ty)
    touch |= (d3 == 0) & (st_lo_x <= ax) & (ax <= st_hi_x) & (st_lo_y <= ay) & (
        ay <= st_hi_y
    ) & ~(s_is_a | t_is_a)
    touch |= (d4 == 0) & (st_lo_x <= bx) & (bx <= st_hi_x) & (st_lo_y <= by) & (
        by <= st_hi_y
    ) & ~(s_is_b | t_is_b)

    touch |= (s_is_a & t_is_b) | (s_is_b & t_is_a)
    return bool(touch.any())


# ---------------------------------------------------------------------------
# per-sector builders

def _empty_sector_grid(hub: Point) -> PowerGrid:
    return PowerGrid(nodes=[GridNode(0, hub[0], hub[1], "hub")], edges=[])


def _cell_xy(cells: list[Cell]) -> np.ndarray:
    return np.array([[c.x_m, c.y_m] for c in cells], dtype=float)


def build_bus(
    sector_cells: list[Cell],
    hub: Point,
    bisector_rad: float,
    max_wire_m: float,
) -> PowerGrid:
    """Straight spine from the hub along the sector bisector.

    Spine length is min(max_wire_m, furthest positive projection); every
    cell drops perpendicularly onto its (clamped) projection point, and
    cells projecting at or behind the hub wire straight to the hub.
    """
    cells = sorted(sector_cells, key=lambda c: c.id)
    grid = _empty_sector_grid(hub)
    if not cells:
        return grid

    hx, hy = hub
    ux = math.cos(bisector_rad)
    uy = math.sin(bisector_rad)
    xy = _cell_xy(cells)
    proj = (xy[:, 0] - hx) * ux + (xy[:, 1] - hy) * uy
    positive = proj[proj > 0.0]
    spine_len = min(max_wire_m, float(positive.max())) if positive.size else 0.0
    t = np.clip(proj, 0.0, spine_len)
    attach_x = hx + t * ux
    attach_y = hy + t * uy
    drop = np.hypot(xy[:, 0] - attach_x, xy[:, 1] - attach_y)

    nodes = grid.nodes
    edges = grid.edges
    cell_node = {}
    for i, c in enumerate(cells):
        node = GridNode(len(nodes), c.x_m, c.y_m, "cell", cell_id=c.id)
        nodes.append(node)
        cell_node[i] = node.id
        grid.wire_distance_m[c.id] = float(t[i] + drop[i])

    for i in np.flatnonzero(t == 0.0):
        edges.append(GridEdge(0, cell_node[int(i)], float(drop[i])))

    prev = 0
    for tv in np.unique(t[t > 0.0]):
        group = np.flatnonzero(t == tv)
        on_spine = [int(i) for i in group if drop[i] == 0.0]
        if on_spine:
            junction = cell_node[on_spine[0]]
            hang = [int(i) for i in group if int(i) != on_spine[0]]
        else:
            junction = len(nodes)
            nodes.append(
                GridNode(junction, float(hx + tv * ux), float(hy + tv * uy), "junction")
            )
            hang = [int(i) for i in group]
        jx, jy = nodes[junction].x_m, nodes[junction].y_m
        px, py = nodes[prev].x_m, nodes[prev].y_m
        edges.append(GridEdge(prev, junction, math.hypot(jx - px, jy - py)))
        for i in hang:
            edges.append(GridEdge(junction, cell_node[i], float(drop[i])))
        prev = junction

    return grid


def build_tree(sector_cells: list[Cell], hub: Point) -> PowerGrid:
    """Accretion tree: repeatedly wire the unconnected cell closest to any
    already-connected node (ties: lower cell id; equidistant targets:
    earliest-connected node)."""
    cells = sorted(sector_cells, key=lambda c: c.id)
    grid = _empty_sector_grid(hub)
    if not cells:
        return grid

    xy = _cell_xy(cells)
    n = len(cells)
    dist = np.hypot(xy[:, 0] - hub[0], xy[:, 1] - hub[1])
    nearest_node = np.zeros(n, dtype=int)
    connected = np.zeros(n, dtype=bool)
    wire_by_node = np.zeros(n + 1)

    nodes = grid.nodes
    for c in cells:
        nodes.append(GridNode(len(nodes), c.x_m, c.y_m, "cell", cell_id=c.id))

    for _ in range(n):
        c = int(np.argmin(np.where(connected, np.inf, dist)))
        attach = int(nearest_node[c])
        hop = float(dist[c])
        grid.edges.append(GridEdge(attach, c + 1, hop))
        wire_by_node[c + 1] = wire_by_node[attach] + hop
        grid.wire_distance_m[cells[c].id] = float(wire_by_node[c + 1])
        connected[c] = True
        newd = np.hypot(xy[:, 0] - xy[c, 0], xy[:, 1] - xy[c, 1])
        closer = ~connected & (newd < dist)
        dist[closer] = newd[closer]
        nearest_node[closer] = c + 1

    return grid


def build_chain(sector_cells: list[Cell], hub: Point) -> PowerGrid:
    """Serpentine chain: keep extending from the last-wired cell to the
    nearest unconnected cell; when that hop would cross an existing wire,
    branch from the candidate's nearest crossing-free node instead.

    If every attachment would cross (possible only in pathological
    layouts), the nearest node is used anyway and the grid's
    forced_crossings counter is bumped.
    """
    cells = sorted(sector_cells, key=lambda c: c.id)
    grid = _empty_sector_grid(hub)
    if not cells:
        return grid

    xy = _cell_xy(cells)
    n = len(cells)
    node_xy = np.vstack([np.array(hub, dtype=float)[None, :], xy])
    nodes = grid.nodes
    for c in cells:
        nodes.append(GridNode(len(nodes), c.x_m, c.y_m, "cell", cell_id=c.id))

    edge_a = np.empty((n, 2))
    edge_b = np.empty((n, 2))
    n_edges = 0
    connected = np.zeros(n, dtype=bool)
    wire_by_node = np.zeros(n + 1)
    tip = 0

    for _ in range(n):
        d_tip = np.hypot(xy[:, 0] - node_xy[tip, 0], xy[:, 1] - node_xy[tip, 1])
        c = int(np.argmin(np.where(connected, np.inf, d_tip)))
        cx, cy = xy[c]

        attach = tip
        if d_tip[c] > 0.0 and n_edges and _crosses_any(
            node_xy[tip, 0], node_xy[tip, 1], cx, cy, edge_a[:n_edges], edge_b[:n_edges]
        ):
            node_ids = np.concatenate(([0], np.flatnonzero(connected) + 1))
            nd = np.hypot(node_xy[node_ids, 0] - cx, node_xy[node_ids, 1] - cy)
            order = node_ids[np.lexsort((node_ids, nd))]
            attach = -1
            for nid in order:
                if nid == tip:
                    continue  # already known to cross
                nx, ny = node_xy[nid]
                if (nx == cx and ny == cy) or not _crosses_any(
                    nx, ny, cx, cy, edge_a[:n_edges], edge_b[:n_edges]
                ):
                    attach = int(nid)
                    break
            if attach < 0:
                attach = int(order[0])
                grid.forced_crossings += 1

        hop = math.hypot(cx - node_xy[attach, 0], cy - node_xy[attach, 1])
        grid.edges.append(GridEdge(attach, c + 1, hop))
        wire_by_node[c + 1] = wire_by_node[attach] + hop
        grid.wire_distance_m[cells[c].id] = float(wire_by_node[c + 1])
        edge_a[n_edges] = node_xy[attach]
        edge_b[n_edges] = xy[c]
        n_edges += 1
        connected[c] = True
        tip = c + 1

    return grid


# ---------------------------------------------------------------------------
# whole-grid assembly

def build_grid(deployment: CellDeployment, config: SimulationConfig) -> PowerGrid:
    """Build every sector's feeder under config.topology and merge them.

    Sectors are convex for n_branches >= 2, so wires from different
    sectors cannot cross; the merged graph stays a tree rooted at the hub.
    """
    if math.isnan(deployment.hub_x_m) or math.isnan(deployment.hub_y_m):
        raise GeometryError("deployment has no hub position")
    hub = (deployment.hub_x_m, deployment.hub_y_m)
    nb = config.n_branches
    for cell in deployment.cells:
        if not 0 <= cell.sector < nb:
            raise GeometryError(
                "cell %d has no valid sector label (run assign_sectors first)"
                % cell.id
            )

    grid = PowerGrid(
        nodes=[GridNode(0, hub[0], hub[1], "hub")],
        edges=[],
        n_branches=nb,
    )
    width = 2.0 * math.pi / nb
    for k in range(nb):
        sector_cells = [c for c in deployment.cells if c.sector == k]
        if config.topology == "bus":
            bisector = config.sector_anchor_rad + (k + 0.5) * width
            sub = build_bus(sector_cells, hub, bisector, config.max_wire_m)
        elif config.topology == "tree":
            sub = build_tree(sector_cells, hub)
        else:
            sub = build_chain(sector_cells, hub)

        offset = len(grid.nodes) - 1
        for node in sub.nodes[1:]:
            grid.nodes.append(
                GridNode(
                    node.id + offset,
                    node.x_m,
                    node.y_m,
                    node.kind,
                    cell_id=node.cell_id,
                    sector=k,
                )
            )
        for e in sub.edges:
            a = e.a + offset if e.a else 0
            b = e.b + offset if e.b else 0
            grid.edges.append(GridEdge(a, b, e.length_m))
        grid.wire_distance_m.update(sub.wire_distance_m)
        for c in sector_cells:
            grid.branch_of[c.id] = k
        grid.forced_crossings += sub.forced_crossings

    return grid


def wire_distance(grid: PowerGrid, cell_id: int) -> float:
    """Hub-to-cell path length along the feeder, in meters."""
    try:
        return grid.wire_distance_m[cell_id]
    except KeyError:
        raise KeyError("cell %d is not part of this grid" % cell_id) from None


def mark_served(
    grid: PowerGrid, max_wire_m: float, max_cells_per_branch: int
) -> PowerGrid:
    """Flag the served cells: wire distance within reach, and within the
    per-branch fan-out cap (nearest first, ties by cell id)."""
    per_branch: dict[int, list[tuple[float, int]]] = {}
    for cid, branch in grid.branch_of.items():
        grid.served[cid] = False
        dist = grid.wire_distance_m[cid]
        if dist <= max_wire_m:
            per_branch.setdefault(branch, []).append((dist, cid))
    for ranked in per_branch.values():
        ranked.sort()
        for _, cid in ranked[:max_cells_per_branch]:
            grid.served[cid] = True
    return grid


def reachability_fraction(grid: PowerGrid) -> float | None:
    """Served fraction of all cells; None for an empty deployment."""
    if not grid.served:
        return None
    return sum(grid.served.values()) / len(grid.served)
