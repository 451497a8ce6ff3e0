import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvcover.agents import Agent
from gvcover.control import (ControlGains, MissingNeighborCell, OutsideRegion, branch_jacobian,
                             branch_normal, constrain, optimal_law, suboptimal_law)
from gvcover.geometry import ConvexPolygon, Disk, HyperbolaBranch, hyperbola_branch
from gvcover.objective import Grid, Uniform, coverage
from gvcover.partition import Partition, build_partition

SQUARE = ConvexPolygon.box(0, 0, 10, 10)
PHI = Uniform(1.0)


def moved_branch(h, which, dv):
    fi = h.focus_i + (dv if which == "i" else 0.0)
    fj = h.focus_j + (dv if which == "j" else 0.0)
    return HyperbolaBranch(fi, fj, h.a, h.side)


def fd_jacobian(h, t, which, step=1e-6):
    """d gamma / d focus by central differences, columns per focus coordinate."""
    out = np.zeros((2, 2))
    for k in range(2):
        dv = np.zeros(2)
        dv[k] = step
        out[:, k] = (moved_branch(h, which, dv).point(t)
                     - moved_branch(h, which, -dv).point(t)) / (2 * step)
    return out


def fd_gradient(agents, i, region=SQUARE, phi=PHI, step=1e-5):
    def H(ag):
        return coverage(build_partition(ag, region), phi).total

    g = np.zeros(2)
    for k in range(2):
        dv = np.zeros(2)
        dv[k] = step
        plus = [a.moved_to(a.q + dv) if a.id == i else a for a in agents]
        minus = [a.moved_to(a.q - dv) if a.id == i else a for a in agents]
        g[k] = (H(plus) - H(minus)) / (2 * step)
    return g


def random_triple(rng):
    base = np.array([[3.5, 3.5], [5.0, 4.0], [4.0, 5.3]])
    while True:
        q = base + rng.normal(0, 0.35, (3, 2))
        ru = rng.uniform(0.05, 0.3, 3)
        d = [np.hypot(*(q[a] - q[b])) - ru[a] - ru[b]
             for a, b in ((0, 1), (0, 2), (1, 2))]
        if min(d) > 0.15:
            return [Agent(k, q[k], ru[k], 1.3) for k in range(3)]


# --- normals -------------------------------------------------------------------


def test_vertex_normal_points_away_from_cell():
    h = hyperbola_branch(Disk((0, 0), 0.5), Disk((4, 0), 0.5))
    np.testing.assert_allclose(branch_normal(h, 0.0), [1.0, 0.0], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(-4, 4), st.floats(0, 0.9), st.floats(-math.pi, math.pi))
def test_normal_is_unit_and_orthogonal(t, a, ang):
    fj = 3.0 * np.array([math.cos(ang), math.sin(ang)])
    h = HyperbolaBranch((0.2, -0.1), fj + [0.2, -0.1], a * 1.4)
    n = branch_normal(h, t)
    tang = h.deriv(t) / np.hypot(*h.deriv(t))
    assert np.hypot(*n) == pytest.approx(1.0, abs=1e-9)
    assert abs(n @ tang) <= 1e-9
    # outward: stepping along n leaves the convex side
    assert h.implicit(h.point(t) + 1e-4 * n) > 0


def test_normal_vectorised():
    h = hyperbola_branch(Disk((0, 0), 0.3), Disk((2, 1), 0.2))
    t = np.linspace(-2, 2, 7)
    n = branch_normal(h, t)
    np.testing.assert_allclose([branch_normal(h, x) for x in t], n, atol=1e-15)


# --- jacobians -----------------------------------------------------------------


def test_jacobian_matches_finite_differences_fixed():
    h = hyperbola_branch(Disk((0.3, 0.1), 0.4), Disk((2.5, 1.1), 0.3))
    for which in "ij":
        for t in (-1.3, 0.0, 0.7, 2.5):
            J = branch_jacobian(h, t, which).T
            np.testing.assert_allclose(J, fd_jacobian(h, t, which), rtol=1e-4, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 0.45), st.floats(-math.pi, math.pi),
       st.floats(0.5, 5), st.sampled_from("ij"))
def test_jacobian_property(t, ratio, ang, dist, which):
    fi = np.array([0.5, -0.3])
    fj = fi + dist * np.array([math.cos(ang), math.sin(ang)])
    h = HyperbolaBranch(fi, fj, ratio * dist)
    J = branch_jacobian(h, t, which).T
    fd = fd_jacobian(h, t, which)
    assert np.abs(J - fd).max() <= 1e-4 * max(1.0, np.abs(fd).max())


def test_jacobians_sum_to_identity():
    h = hyperbola_branch(Disk((1, 2), 0.2), Disk((-1, 4), 0.6))
    t = np.linspace(-3, 3, 13)
    total = branch_jacobian(h, t, "i") + branch_jacobian(h, t, "j")
    np.testing.assert_allclose(total, np.broadcast_to(np.eye(2), total.shape), atol=1e-9)


def test_vertex_jacobian_axis_aligned():
    # the vertex follows the foci midpoint and swings with the focal axis
    h = hyperbola_branch(Disk((0, 0), 0.4), Disk((3, 0), 0.4))
    J = branch_jacobian(h, 0.0, "i").T
    np.testing.assert_allclose(J, [[0.5, 0.0], [0.0, 0.5 + 0.4 / 3.0]], atol=1e-15)


def test_straight_branch_normal():
    h = HyperbolaBranch((0, 0), (4, 0), 0.0)
    np.testing.assert_allclose(branch_normal(h, np.array([-1.0, 0.0, 2.0])),
                               [[1, 0], [1, 0], [1, 0]], atol=1e-15)


def test_jacobian_rejects_bad_focus():
    h = hyperbola_branch(Disk((0, 0), 0.4), Disk((3, 0), 0.4))
    with pytest.raises(ValueError):
        branch_jacobian(h, 0.0, "k")


# --- laws ----------------------------------------------------------------------


def test_isolated_agent_does_not_move():
    part = build_partition([Agent(0, (5, 5), 0.1, 1.0)], SQUARE)
    np.testing.assert_allclose(optimal_law(0, part, PHI), [0, 0], atol=1e-12)
    np.testing.assert_allclose(suboptimal_law(0, part, PHI), [0, 0], atol=1e-12)


def test_optimal_law_matches_finite_differences_fixed():
    agents = [Agent(0, (3.5, 3.4), 0.2, 1.3), Agent(1, (4.8, 3.9), 0.1, 1.3),
              Agent(2, (3.9, 5.1), 0.25, 1.3)]
    part = build_partition(agents, SQUARE)
    for a in agents:
        u = optimal_law(a.id, part, PHI)
        g = fd_gradient(agents, a.id)
        assert np.hypot(*(u - g)) <= max(0.05 * np.hypot(*g), 1e-4)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_optimal_law_is_gradient(seed):
    agents = random_triple(np.random.default_rng(seed))
    part = build_partition(agents, SQUARE)
    for a in agents:
        u = optimal_law(a.id, part, PHI)
        g = fd_gradient(agents, a.id)
        assert np.hypot(*(u - g)) <= max(0.05 * np.hypot(*g), 1e-4)


def test_optimal_law_gradient_with_grid_density():
    rng = np.random.default_rng(11)
    phi = Grid((0.0, 0.0), 1.0, rng.uniform(0.2, 2.0, (11, 11)))
    agents = [Agent(0, (3.5, 3.4), 0.2, 1.3), Agent(1, (4.8, 3.9), 0.1, 1.3),
              Agent(2, (3.9, 5.1), 0.25, 1.3)]
    part = build_partition(agents, SQUARE)
    for a in agents:
        u = optimal_law(a.id, part, phi)
        g = fd_gradient(agents, a.id, phi=phi, step=1e-6)
        assert np.hypot(*(u - g)) <= max(0.05 * np.hypot(*g), 1e-4)


def test_mirror_symmetric_pair():
    agents = [Agent(0, (4.4, 3.0), 0.2, 1.2), Agent(1, (5.6, 3.0), 0.2, 1.2)]
    part = build_partition(agents, SQUARE)
    u0, u1 = optimal_law(0, part, PHI), optimal_law(1, part, PHI)
    assert u0[0] == pytest.approx(-u1[0], abs=1e-9)
    assert u0[1] == pytest.approx(u1[1], abs=1e-9)
    assert u0[0] < 0


def test_gain_scales_law():
    agents = [Agent(0, (4.4, 3.0), 0.2, 1.2), Agent(1, (5.6, 3.0), 0.2, 1.2)]
    part = build_partition(agents, SQUARE)
    u1 = optimal_law(0, part, PHI)
    u3 = optimal_law(0, part, PHI, ControlGains(alpha={0: 3.0}))
    np.testing.assert_allclose(u3, 3 * u1)


def test_suboptimal_near_wall_points_to_free_space():
    part = build_partition([Agent(0, (0.5, 5), 0.1, 1.0)], SQUARE)
    u = suboptimal_law(0, part, PHI)
    assert u[0] > 0 and abs(u[1]) < 1e-12


def test_laws_agree_without_hyperbolic_arcs():
    # two agents far apart, one cut by the wall: no hyperbolic arc touches either GSR
    agents = [Agent(0, (0.6, 2), 0.1, 1.0), Agent(1, (8, 8), 0.1, 1.0)]
    part = build_partition(agents, SQUARE)
    for i in (0, 1):
        np.testing.assert_allclose(optimal_law(i, part, PHI), suboptimal_law(i, part, PHI),
                                   atol=1e-12)


def test_suboptimal_zero_iff_circle_uncut(rng):
    agents = [Agent(0, (3, 3), 0.1, 1.0), Agent(1, (4.2, 3.3), 0.1, 1.0),
              Agent(2, (7, 7), 0.1, 1.0), Agent(3, (9.5, 1.0), 0.1, 1.0)]
    part = build_partition(agents, SQUARE)
    for a in agents:
        segs = list(part.gs_cells[a.id].segments)
        uncut = len(segs) == 1 and segs[0].tag.kind == "sensing"
        u = suboptimal_law(a.id, part, PHI)
        assert (np.hypot(*u) < 1e-12) == uncut


def test_empty_cell_stalls():
    agents = [Agent(0, (3, 3), 0.5, 1.0), Agent(1, (3.6, 3), 0.5, 1.0), Agent(2, (8, 8), 0.1, 1)]
    part = build_partition(agents, SQUARE)
    np.testing.assert_array_equal(optimal_law(0, part, PHI), [0.0, 0.0])


def test_missing_neighbour_cell_raises():
    agents = [Agent(0, (4.4, 3.0), 0.2, 1.2), Agent(1, (5.6, 3.0), 0.2, 1.2)]
    part = build_partition(agents, SQUARE)
    partial = Partition(part.cells, {0: part.gs_cells[0]}, part.neighbor_sets, SQUARE, part.agents)
    with pytest.raises(MissingNeighborCell):
        optimal_law(0, partial, PHI)


# --- containment ----------------------------------------------------------------


def test_interior_velocity_unchanged():
    u = constrain(0, np.array([0.3, -0.4]), (5, 5), SQUARE)
    np.testing.assert_array_equal(u, [0.3, -0.4])


def test_edge_projection():
    u = constrain(0, np.array([0.3, -0.4]), (5, 0), SQUARE)
    np.testing.assert_allclose(u, [0.3, 0.0])


def test_inward_velocity_on_edge_unchanged():
    u = constrain(0, np.array([0.3, 0.4]), (5, 0), SQUARE)
    np.testing.assert_allclose(u, [0.3, 0.4])


def test_corner_outward_cone_gives_zero():
    u = constrain(0, np.array([-0.3, -0.4]), (0, 0), SQUARE)
    np.testing.assert_array_equal(u, [0.0, 0.0])


def test_corner_slides_along_admissible_edge():
    u = constrain(0, np.array([0.3, -0.4]), (0, 0), SQUARE)
    np.testing.assert_allclose(u, [0.3, 0.0])


def test_outside_raises():
    with pytest.raises(OutsideRegion):
        constrain(0, np.zeros(2), (-0.1, 5), SQUARE)


def test_gains_validation():
    with pytest.raises(ValueError):
        ControlGains(alpha=0.0)
    with pytest.raises(ValueError):
        ControlGains(epsilon_probe=0.0)
