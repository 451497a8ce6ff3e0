"""Why every agent has to be considered when building a cell.

With unequal uncertainty radii a site that is not a Delaunay neighbour
can still cut a guaranteed Voronoi cell.  This script builds the cell of
agent 0 once from Delaunay neighbours only and once from all agents,
measures both against a dense grid and draws the full partition.

    python3 demos/unequal_radii.py
"""

from pathlib import Path

import numpy as np

from gvcover.agents import Agent
from gvcover.cli import render_svg
from gvcover.geometry import ConvexPolygon, CurvedRegion, clip_halfregion, hyperbola_branch
from gvcover.partition import build_partition, delaunay_neighbors, gv_membership

SQUARE = ConvexPolygon.box(0, 0, 10, 10)
SITES = [((2.252, 3.002), 0.621), ((8.212, 7.971), 0.004), ((5.045, 5.535), 0.356),
         ((1.602, 6.125), 0.172), ((5.149, 4.662), 0.029), ((8.3, 1.545), 0.003)]


def main():
    agents = [Agent(k, q, r, 1.0) for k, (q, r) in enumerate(SITES)]
    part = build_partition(agents, SQUARE)
    dn = delaunay_neighbors([a.q for a in agents])
    coarse = CurvedRegion.from_polygon(SQUARE)
    for j in sorted(dn[0]):
        coarse = clip_halfregion(coarse, hyperbola_branch(agents[0].uncertainty_disk,
                                                          agents[j].uncertainty_disk))
    xs = (np.arange(800) + 0.5) / 80
    X, Y = np.meshgrid(xs, xs)
    pts = np.c_[X.ravel(), Y.ravel()]
    oracle = gv_membership(pts, agents, 0).mean() * SQUARE.area()
    print(f"Delaunay neighbours of 0: {sorted(dn[0])}")
    print(f"cell neighbours of 0:     {sorted(part.neighbor_sets.guaranteed[0])}")
    print(f"area of cell 0: grid {oracle:.4f}, all agents {part.cells[0].area():.4f}, "
          f"Delaunay only {coarse.area():.4f}")
    out = Path("out/unequal_radii.svg")
    out.parent.mkdir(exist_ok=True)
    out.write_text(render_svg(part, title="unequal radii"))
    print(f"partition drawn to {out}")


if __name__ == "__main__":
    main()
