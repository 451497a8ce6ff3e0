"""Coverage control laws and the containment projection.

Both laws are written for a centralised simulation of the distributed
scheme: agent ``i`` reads its own guaranteed-sensing cell and, for the
optimal law, the cells of its guaranteed neighbours.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .geometry import (EPS_ARC, ConvexPolygon, GeometryError, HyperbolaBranch, Segment,
                       as_point, polygon_tangent_project, quadrature_nodes)
from .objective import ScalarField
from .partition import Partition

log = logging.getLogger(__name__)


class MissingNeighborCell(KeyError):
    pass


class OutsideRegion(GeometryError):
    pass


@dataclass(frozen=True)
class ControlGains:
    alpha: float | Mapping[int, float] = 1.0
    epsilon_probe: float = 1e-6

    def __post_init__(self):
        values = self.alpha.values() if isinstance(self.alpha, Mapping) else [self.alpha]
        if any(not a > 0 for a in values):
            raise ValueError("gains must be positive")
        if not self.epsilon_probe > 0:
            raise ValueError("epsilon_probe must be positive")

    def alpha_for(self, i: int) -> float:
        if isinstance(self.alpha, Mapping):
            return float(self.alpha.get(i, 1.0))
        return float(self.alpha)


# --- boundary kinematics ---------------------------------------------------


def branch_normal(h: HyperbolaBranch, t) -> np.ndarray:
    """Outward unit normal at ``h(t)`` of the convex side holding the near focus.

    The curvature vector ``g'' - (g'' . T) T`` points to the centre of
    curvature, i.e. into the convex side, so the outward normal is its
    negated direction.
    """
    d1 = h.deriv(t)
    d2 = h.deriv2(t)
    tang = d1 / np.linalg.norm(d1, axis=-1, keepdims=True)
    curv = d2 - np.sum(d2 * tang, axis=-1, keepdims=True) * tang
    norm = np.linalg.norm(curv, axis=-1, keepdims=True)
    flat = norm <= 1e-12 * np.linalg.norm(d2, axis=-1, keepdims=True)
    if h.a == 0.0 or np.any(flat):
        # straight branch (zero radii): point from the near focus towards the far one
        n_lin = -h.sign * h.axis * np.ones_like(d1)
        if h.a == 0.0:
            return n_lin
        return np.where(flat, n_lin, -curv / np.where(flat, 1.0, norm))
    return -curv / norm


def branch_jacobian(h: HyperbolaBranch, t, which_focus: str) -> np.ndarray:
    """Transpose Jacobian of ``h(t)`` w.r.t. one focus, radii and ``t`` held fixed.

    ``which_focus`` is ``"i"`` for ``h.focus_i`` or ``"j"`` for ``h.focus_j``.
    Returns an array of shape ``t.shape + (2, 2)``; ``result @ n`` is the
    contribution of a boundary normal ``n``.
    """
    t = np.asarray(t, dtype=float)
    e, ep = h.axis, h.normal_axis
    D = 2.0 * h.c
    ch, sh = np.cosh(t)[..., None, None], np.sinh(t)[..., None, None]
    # derivative of the branch point w.r.t. d = focus_j - focus_i
    d_axis = np.outer(ep, ep) / D                 # d e / d d
    d_normal = -np.outer(e, ep) / D               # d e_perp / d d
    d_b = (h.c / (2.0 * h.b)) * np.outer(ep, e)   # e_perp (d b / d d)
    dg_dd = h.sign * h.a * ch * d_axis + sh * d_b + h.b * sh * d_normal
    half = 0.5 * np.eye(2)
    if which_focus == "j":
        jac = half + dg_dd
    elif which_focus == "i":
        jac = half - dg_dd
    else:
        raise ValueError("which_focus must be 'i' or 'j'")
    return np.swapaxes(jac, -1, -2)


# --- laws -------------------------------------------------------------------


def _arc_integral(seg: Segment, phi: ScalarField, eps_arc: float, weight=None) -> np.ndarray:
    t, pts, dq = quadrature_nodes(seg, eps_arc)
    ds = np.linalg.norm(dq, axis=1)
    n = seg.outward_normals(t)
    if weight is not None:
        n = np.einsum("kab,kb->ka", weight(t), n)
    return (ds * phi(pts)) @ n


def sensing_term(i: int, partition: Partition, phi: ScalarField,
                 eps_arc: float = EPS_ARC) -> np.ndarray:
    """Integral of ``n phi`` over the sensing-circle part of cell ``i``."""
    u = np.zeros(2)
    for seg in partition.gs_cells[i].segments_with("sensing", i=i):
        u += _arc_integral(seg, phi, eps_arc)
    return u


def suboptimal_law(i: int, partition: Partition, phi: ScalarField,
                   gains: ControlGains = ControlGains(), eps_arc: float = EPS_ARC) -> np.ndarray:
    return gains.alpha_for(i) * sensing_term(i, partition, phi, eps_arc)


def optimal_law(i: int, partition: Partition, phi: ScalarField,
                gains: ControlGains = ControlGains(), eps_arc: float = EPS_ARC) -> np.ndarray:
    """Gradient of the coverage objective with respect to agent ``i``'s position.

    Sensing arcs move rigidly with the agent; hyperbolic arcs of its own
    cell and the facing arcs of neighbouring cells move through the
    focus Jacobians.  Arcs on the region boundary do not move.
    """
    gs = partition.gs_cells
    if i not in gs:
        raise MissingNeighborCell(i)
    if gs[i].is_empty:
        log.info("agent %s has an empty guaranteed-sensing cell; stalling", i)
        return np.zeros(2)
    u = sensing_term(i, partition, phi, eps_arc)
    for seg in gs[i].segments_with("hyperbolic", i=i):
        h = seg.curve
        u += _arc_integral(seg, phi, eps_arc, lambda t, h=h: branch_jacobian(h, t, "i"))
    required = partition.neighbor_sets.guaranteed.get(i, frozenset())
    missing = [j for j in required if j not in gs]
    if missing:
        raise MissingNeighborCell(f"agent {i} needs the cells of {sorted(missing)}")
    for j, cell in gs.items():
        if j == i:
            continue
        for seg in cell.segments_with("hyperbolic", i=j, j=i):
            h = seg.curve
            u += _arc_integral(seg, phi, eps_arc, lambda t, h=h: branch_jacobian(h, t, "j"))
    return gains.alpha_for(i) * u


def constrain(i: int, u, q, omega_s: ConvexPolygon, gains: ControlGains = ControlGains(),
              slack: float = 1e-9) -> np.ndarray:
    """Keep agent ``i`` inside its eroded region ``omega_s``.

    Raises OutsideRegion when ``q`` already lies outside beyond ``slack``.
    """
    q = as_point(q)
    if float(omega_s.implicit(q)) > slack:
        raise OutsideRegion(f"agent {i} at {q} is outside its admissible region")
    return polygon_tangent_project(omega_s, q, np.asarray(u, dtype=float),
                                   gains.epsilon_probe, slack)
