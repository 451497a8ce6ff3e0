import numpy as np
import pytest

from gvcover.agents import Agent
from gvcover.geometry import ConvexPolygon


def random_convex_polygon(rng, n_vertices=None, scale=10.0) -> ConvexPolygon:
    """Convex polygon from sorted random angles on a jittered ellipse."""
    n = n_vertices or int(rng.integers(3, 9))
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        if np.min(np.diff(np.r_[ang, ang[0] + 2 * np.pi])) < 0.3:
            continue
        rx, ry = scale * rng.uniform(0.35, 0.5, 2)
        pts = np.c_[rx * np.cos(ang), ry * np.sin(ang)] + scale / 2
        try:
            return ConvexPolygon(pts)
        except ValueError:
            continue


def random_agents(rng, region: ConvexPolygon, n: int, r_u=(0.0, 0.3), r_s=(0.8, 1.6),
                  min_gap=0.05, equal_radii=False):
    """Agents with pairwise disjoint uncertainty disks inside ``region``."""
    agents = []
    ru_common = rng.uniform(*r_u)
    tries = 0
    while len(agents) < n:
        tries += 1
        if tries > 10000:
            raise RuntimeError("could not place agents")
        ru = ru_common if equal_radii else rng.uniform(*r_u)
        lo, hi = region.vertices.min(axis=0), region.vertices.max(axis=0)
        q = rng.uniform(lo, hi)
        if region.implicit(q) > -ru:
            continue
        if any(np.hypot(*(q - a.q)) <= ru + a.r_u + min_gap for a in agents):
            continue
        agents.append(Agent(len(agents), q, ru, rng.uniform(*r_s)))
    return agents


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid_points(region: ConvexPolygon, n=200):
    lo, hi = region.vertices.min(axis=0), region.vertices.max(axis=0)
    xs = np.linspace(lo[0], hi[0], n + 1)
    ys = np.linspace(lo[1], hi[1], n + 1)
    xc, yc = 0.5 * (xs[:-1] + xs[1:]), 0.5 * (ys[:-1] + ys[1:])
    X, Y = np.meshgrid(xc, yc)
    pts = np.c_[X.ravel(), Y.ravel()]
    cell_area = (xs[1] - xs[0]) * (ys[1] - ys[0])
    inside = region.implicit(pts) <= 0
    return pts[inside], cell_area


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title, detail = results[n]
        terminalreporter.write_line(f"{n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    missing = sorted(set(range(1, 11)) - set(results))
    if missing:
        terminalreporter.write_line(f"not run: {missing}")
