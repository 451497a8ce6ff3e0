"""Guaranteed Voronoi partition of a convex region among uncertain agents."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .agents import Agent, guaranteed_sensing_disk
from .geometry import (EMPTY, EPS_ARC, ConvexPolygon, CurvedRegion, Disk, GeometryError,
                       clip_disk, clip_halfregion, hyperbola_branch, hyperbolic_tag,
                       sensing_tag)

log = logging.getLogger(__name__)


class DuplicatePoints(GeometryError):
    pass


def delaunay_neighbors(points: Sequence, ids: Sequence[int] | None = None) -> dict[int, set[int]]:
    """Delaunay adjacency of ``points`` keyed by ``ids`` (default 0..n-1).

    Collinear inputs degenerate to a chain ordered lexicographically; co-
    circular quadruples get exactly one diagonal from Qhull's triangulated
    output.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ids = list(range(len(pts))) if ids is None else list(ids)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    for a in range(len(pts)):
        d = np.hypot(*(pts[a + 1:] - pts[a]).T)
        if np.any(d <= 1e-9):
            b = a + 1 + int(np.argmax(d <= 1e-9))
            raise DuplicatePoints(f"agents {ids[a]} and {ids[b]} coincide")
    nbrs: dict[int, set[int]] = {i: set() for i in ids}
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    simplices = None
    if len(pts) >= 3:
        try:
            simplices = Delaunay(pts).simplices
        except QhullError:
            simplices = None  # all collinear
    if simplices is None:
        for a, b in zip(order[:-1], order[1:]):
            nbrs[ids[a]].add(ids[b])
            nbrs[ids[b]].add(ids[a])
        return nbrs
    for tri in simplices:
        for a in tri:
            for b in tri:
                if a != b:
                    nbrs[ids[a]].add(ids[b])
    return nbrs


@dataclass(frozen=True)
class NeighborSets:
    delaunay: Mapping[int, frozenset]
    guaranteed: Mapping[int, frozenset]
    two_hop: Mapping[int, frozenset]


@dataclass(frozen=True, eq=False)
class Partition:
    cells: Mapping[int, CurvedRegion]
    gs_cells: Mapping[int, CurvedRegion]
    neighbor_sets: NeighborSets
    region: ConvexPolygon = field(repr=False)
    agents: tuple = field(default=(), repr=False)

    def agent(self, i: int) -> Agent:
        return next(a for a in self.agents if a.id == i)


def _overlaps_any(a: Agent, agents: Sequence[Agent]) -> bool:
    for b in agents:
        if b.id != a.id and np.hypot(*(b.q - a.q)) <= a.r_u + b.r_u:
            return True
    return False


def gv_cell(i: int, agents: Sequence[Agent], region: ConvexPolygon,
            neighbors: Mapping[int, set] | None = None) -> CurvedRegion:
    """Guaranteed Voronoi cell of agent ``i`` inside ``region``.

    Classic Delaunay neighbours (``neighbors``, computed when omitted) are
    clipped first; every other agent is then tried as well, because with
    unequal radii a non-Delaunay site can still cut the cell.  Sites whose
    hyperbolic region provably contains the current cell cost only a
    bounding-circle test.  The
    cell is empty when the agent's uncertainty disk touches any other
    agent's.
    """
    by_id = {a.id: a for a in agents}
    me = by_id[i]
    if _overlaps_any(me, agents):
        return EMPTY
    if neighbors is None:
        neighbors = (delaunay_neighbors([a.q for a in agents], [a.id for a in agents])
                     if len(agents) > 1 else {i: set()})
    first = sorted(neighbors[i])
    rest = sorted((a.id for a in agents if a.id != i and a.id not in neighbors[i]),
                  key=lambda j: np.hypot(*(by_id[j].q - me.q)))
    cell = CurvedRegion.from_polygon(region)
    di = me.uncertainty_disk
    for j in first + rest:
        h = hyperbola_branch(di, by_id[j].uncertainty_disk)
        cell = clip_halfregion(cell, h, hyperbolic_tag(i, j))
        if cell.is_empty:
            break
    return cell


def guaranteed_neighbors(i: int, cells: Mapping[int, CurvedRegion],
                         eps_arc: float = EPS_ARC) -> set[int]:
    """Agents whose hyperbolic arc survives on the boundary of cell ``i``."""
    cell = cells.get(i, EMPTY)
    out = set()
    for seg in cell.segments_with("hyperbolic", i=i):
        if seg.length() >= eps_arc:
            out.add(seg.tag.j)
    return out


def build_partition(agents: Sequence[Agent], region: ConvexPolygon,
                    eps_arc: float = EPS_ARC) -> Partition:
    """GV cells, guaranteed-sensing cells and neighbour sets for all agents.

    Guaranteed neighbourhood is symmetrised: ``j`` and ``i`` are neighbours
    when either one's arc against the other survives on its cell.  Agents
    with empty cells have no neighbours and appear in no other set.
    """
    agents = tuple(agents)
    ids = [a.id for a in agents]
    if len(set(ids)) != len(ids):
        raise ValueError("agent ids must be unique")
    if len(agents) > 1:
        dn = delaunay_neighbors([a.q for a in agents], ids)
    else:
        dn = {ids[0]: set()} if ids else {}
    cells, gs_cells = {}, {}
    for a in agents:
        cell = gv_cell(a.id, agents, region, dn)
        cells[a.id] = cell
        gs_cells[a.id] = clip_disk(cell, guaranteed_sensing_disk(a), sensing_tag(a.id))
    live = {i for i in ids if not cells[i].is_empty}
    raw = {i: guaranteed_neighbors(i, cells, eps_arc) & live for i in ids}
    guaranteed = {i: set(raw[i]) for i in ids}
    for i in ids:
        for j in raw[i]:
            guaranteed[j].add(i)
    two_hop = {i: frozenset().union(*(guaranteed[j] for j in guaranteed[i]))
               for i in ids}
    ns = NeighborSets(
        delaunay={i: frozenset(dn[i]) for i in ids},
        guaranteed={i: frozenset(guaranteed[i]) for i in ids},
        two_hop=two_hop,
    )
    return Partition(cells, gs_cells, ns, region, agents)


def gv_membership(points: np.ndarray, agents: Sequence[Agent], i: int) -> np.ndarray:
    """Direct test of the guaranteed-closest condition at ``points``.

    ``max |q - q_i| <= min |q - q_j|`` over the disks, for every other
    agent ``j``; no Delaunay pruning.  Used as an oracle.
    """
    pts = np.asarray(points, dtype=float)
    me = next(a for a in agents if a.id == i)
    far = np.hypot(*(pts - me.q).T) + me.r_u
    ok = np.ones(len(pts), dtype=bool)
    for b in agents:
        if b.id == i:
            continue
        if np.hypot(*(b.q - me.q)) <= me.r_u + b.r_u:
            return np.zeros(len(pts), dtype=bool)
        ok &= far <= np.hypot(*(pts - b.q).T) - b.r_u
    return ok
