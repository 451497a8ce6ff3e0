import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvcover.agents import Agent
from gvcover.geometry import ConvexPolygon, CurvedRegion, clip_halfregion, hyperbola_branch
from gvcover.partition import (DuplicatePoints, build_partition, delaunay_neighbors,
                               guaranteed_neighbors, gv_cell, gv_membership)

from conftest import grid_points, random_agents, random_convex_polygon

SQUARE = ConvexPolygon.box(0, 0, 10, 10)

# six agents with unequal radii; agent 2 cuts the cells of 0 and 5 without
# being their Delaunay neighbour, and 1 has Delaunay neighbours 3, 4 that
# never reach its cell
MIXED = [((2.252, 3.002), 0.621), ((8.212, 7.971), 0.004), ((5.045, 5.535), 0.356),
         ((1.602, 6.125), 0.172), ((5.149, 4.662), 0.029), ((8.3, 1.545), 0.003)]


def mixed_agents():
    return [Agent(k, q, r, 1.0) for k, (q, r) in enumerate(MIXED)]


def _empty_circle_edges(pts):
    """Delaunay edges of points in general position by brute force."""
    edges = set()
    n = len(pts)
    for a, b, c in itertools.combinations(range(n), 3):
        A = np.array([[*(pts[b] - pts[a])], [*(pts[c] - pts[a])]])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        rhs = 0.5 * np.array([pts[b] @ pts[b] - pts[a] @ pts[a],
                              pts[c] @ pts[c] - pts[a] @ pts[a]])
        centre = np.linalg.solve(A, rhs)
        rad = np.hypot(*(pts[a] - centre))
        others = [k for k in range(n) if k not in (a, b, c)]
        if all(np.hypot(*(pts[k] - centre)) > rad + 1e-9 for k in others):
            edges |= {frozenset((a, b)), frozenset((b, c)), frozenset((a, c))}
    return edges


# --- delaunay ------------------------------------------------------------------


def test_two_points_are_mutual_neighbours():
    assert delaunay_neighbors([(0, 0), (1, 0)]) == {0: {1}, 1: {0}}


def test_triangle_is_complete():
    nb = delaunay_neighbors([(0, 0), (1, 0), (0.3, 1)])
    assert nb == {0: {1, 2}, 1: {0, 2}, 2: {0, 1}}


def test_square_gets_exactly_one_diagonal():
    nb = delaunay_neighbors([(0, 0), (1, 0), (1, 1), (0, 1)])
    diagonals = [2 in nb[0], 3 in nb[1]]
    assert sum(diagonals) == 1
    for i in range(4):
        assert {(i + 1) % 4, (i - 1) % 4} <= nb[i]


def test_collinear_points_form_chain():
    nb = delaunay_neighbors([(2, 0), (0, 0), (3, 0), (1, 0)])
    assert nb == {1: {3}, 3: {1, 0}, 0: {3, 2}, 2: {0}}


def test_duplicate_points_raise():
    with pytest.raises(DuplicatePoints):
        delaunay_neighbors([(0, 0), (1, 1), (1 + 1e-10, 1)])


def test_custom_ids():
    nb = delaunay_neighbors([(0, 0), (1, 0)], ids=[7, 9])
    assert nb == {7: {9}, 9: {7}}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(3, 9))
def test_delaunay_matches_empty_circle_oracle(seed, n):
    pts = np.random.default_rng(seed).uniform(0, 10, (n, 2))
    nb = delaunay_neighbors(pts)
    got = {frozenset((i, j)) for i in nb for j in nb[i]}
    assert got == _empty_circle_edges(pts)


# --- cells ----------------------------------------------------------------------


def test_single_agent_cell_is_region():
    cell = gv_cell(0, [Agent(0, (3, 3), 0.2, 1.0)], SQUARE)
    assert cell.area() == pytest.approx(100.0)


def test_overlapping_pair_has_empty_cells():
    agents = [Agent(0, (3, 3), 0.5, 1.0), Agent(1, (3.8, 3), 0.5, 1.0), Agent(2, (8, 8), 0.1, 1)]
    part = build_partition(agents, SQUARE)
    assert part.cells[0].is_empty and part.cells[1].is_empty
    assert not part.cells[2].is_empty
    assert part.neighbor_sets.guaranteed[0] == frozenset()


def test_zero_radius_pair_splits_region_in_halves():
    agents = [Agent(0, (3, 5), 0.0, 1.0), Agent(1, (7, 5), 0.0, 1.0)]
    part = build_partition(agents, SQUARE)
    assert part.cells[0].area() == pytest.approx(50.0, abs=1e-9)
    assert part.cells[1].area() == pytest.approx(50.0, abs=1e-9)


def test_non_delaunay_site_still_cuts_cell():
    agents = mixed_agents()
    dn = delaunay_neighbors([a.q for a in agents])
    assert 2 not in dn[0]
    cells = build_partition(agents, SQUARE).cells
    assert 2 in guaranteed_neighbors(0, cells)
    # Delaunay-only clipping over-estimates the cell of agent 0
    coarse = CurvedRegion.from_polygon(SQUARE)
    for j in sorted(dn[0]):
        coarse = clip_halfregion(coarse, hyperbola_branch(agents[0].uncertainty_disk,
                                                          agents[j].uncertainty_disk))
    pts, da = grid_points(SQUARE, 400)
    oracle = gv_membership(pts, agents, 0).sum() * da
    assert abs(cells[0].area() - oracle) < abs(coarse.area() - oracle)


def test_delaunay_neighbour_without_arc():
    agents = mixed_agents()
    part = build_partition(agents, SQUARE)
    ns = part.neighbor_sets
    assert {3, 4} <= ns.delaunay[1]
    assert not ({3, 4} & ns.guaranteed[1])


def test_two_far_agents_are_guaranteed_neighbours():
    agents = [Agent(0, (2, 5), 0.3, 1.0), Agent(1, (8, 5), 0.2, 1.0)]
    ns = build_partition(agents, SQUARE).neighbor_sets
    assert ns.guaranteed == {0: frozenset({1}), 1: frozenset({0})}


def test_equal_radii_guaranteed_subset_of_delaunay(rng):
    for _ in range(20):
        agents = random_agents(rng, SQUARE, int(rng.integers(3, 9)), equal_radii=True)
        ns = build_partition(agents, SQUARE).neighbor_sets
        for i in ns.guaranteed:
            assert ns.guaranteed[i] <= ns.delaunay[i]


def test_neighbour_sets_are_symmetric_and_two_hop_is_union(rng):
    agents = random_agents(rng, SQUARE, 7)
    ns = build_partition(agents, SQUARE).neighbor_sets
    for i, js in ns.guaranteed.items():
        for j in js:
            assert i in ns.guaranteed[j]
        expect = frozenset().union(*(ns.guaranteed[j] for j in js))
        assert ns.two_hop[i] == expect


def test_converged_case_study_cells_hold_full_disks():
    agents = [Agent(0, (2.0, 2.0), 0.1, 1.0), Agent(1, (5.0, 2.2), 0.1, 1.0),
              Agent(2, (3.0, 5.5), 0.1, 1.0)]
    part = build_partition(agents, SQUARE)
    for a in agents:
        segs = part.gs_cells[a.id].segments
        assert len(segs) == 1 and segs[0].tag.kind == "sensing"
        assert part.gs_cells[a.id].area() == pytest.approx(math.pi * 0.81, rel=1e-12)


def test_zero_radii_cells_tessellate(rng):
    poly = random_convex_polygon(rng)
    agents = [Agent(a.id, a.q, 0.0, a.r_s) for a in random_agents(rng, poly, 6)]
    part = build_partition(agents, poly)
    total = sum(c.area() for c in part.cells.values())
    assert total == pytest.approx(poly.area(), rel=1e-2)


def test_gs_area_below_packing_bound(rng):
    agents = random_agents(rng, SQUARE, 6)
    part = build_partition(agents, SQUARE)
    bound = sum(math.pi * a.gsr_radius**2 for a in agents)
    assert sum(c.area() for c in part.gs_cells.values()) <= bound + 1e-9


def test_duplicate_agents_propagate():
    with pytest.raises(DuplicatePoints):
        build_partition([Agent(0, (1, 1), 0, 1), Agent(1, (1, 1), 0, 1)], SQUARE)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 8))
def test_cells_match_grid_oracle(seed, n):
    rng = np.random.default_rng(seed)
    poly = random_convex_polygon(rng)
    agents = random_agents(rng, poly, n)
    part = build_partition(agents, poly)
    pts, da = grid_points(poly, 200)
    for a in agents:
        mis = np.count_nonzero(gv_membership(pts, agents, a.id)
                               != part.cells[a.id].contains_many(pts)) * da
        assert mis <= 0.01 * poly.area()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_cells_are_disjoint_and_gs_inside(seed):
    rng = np.random.default_rng(seed)
    agents = random_agents(rng, SQUARE, 5)
    part = build_partition(agents, SQUARE)
    pts, da = grid_points(SQUARE, 200)
    member = np.array([part.cells[a.id].contains_many(pts) for a in agents])
    assert np.count_nonzero(member.sum(axis=0) > 1) * da <= 0.01 * SQUARE.area()
    for a in agents:
        gs = part.gs_cells[a.id].contains_many(pts)
        outside = gs & ~(member[a.id] & (np.hypot(*(pts - a.q).T) <= a.gsr_radius + 1e-9))
        assert not outside.any()


def test_growing_uncertainty_shrinks_cells():
    base = [Agent(0, (3, 3), 0.1, 1), Agent(1, (6, 4), 0.2, 1), Agent(2, (4, 7), 0.15, 1)]
    areas0 = {i: c.area() for i, c in build_partition(base, SQUARE).cells.items()}
    for k in range(3):
        grown = [Agent(a.id, a.q, a.r_u + (0.3 if a.id == k else 0.0), a.r_s) for a in base]
        areas1 = {i: c.area() for i, c in build_partition(grown, SQUARE).cells.items()}
        for i in areas0:
            assert areas1[i] <= areas0[i] + 1e-9
