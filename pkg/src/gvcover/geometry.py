"""Planar geometry kernel.

Convex polygons, disks, hyperbola branches and convex regions whose
boundaries mix straight edges, circular arcs and hyperbolic arcs.  Curved
boundaries are kept in parametric form; they are only discretised inside the
quadrature routines.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

#: default chord tolerance (m) used to size quadrature panels
EPS_ARC = 1e-3

#: tolerance on root locations along a curve parameter
ROOT_XTOL = 1e-13

_ARC_SAMPLES = 33
_GAUSS_ORDER = 6
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
# Gauss-Legendre rule mapped to [0, 1]
_GL01_NODES = 0.5 * (_GL_NODES + 1.0)
_GL01_WEIGHTS = 0.5 * _GL_WEIGHTS


class GeometryError(ValueError):
    pass


class OverlappingDisks(GeometryError):
    """Two disks intersect or touch, so no hyperbolic boundary exists."""


class EmptyErosion(GeometryError):
    """An inward offset removed the whole polygon."""


class NotConvexError(GeometryError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


def as_point(p) -> np.ndarray:
    q = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(q)):
        raise GeometryError(f"non-finite point {p!r}")
    return q


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


# ---------------------------------------------------------------------------
# basic shapes


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise GeometryError("non-finite polygon vertex")
        e = np.roll(v, -1, axis=0) - v
        turns = _cross(e, np.roll(e, -1, axis=0))
        if not np.all(turns > 0):
            raise NotConvexError("region not convex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(cls, pts) -> "ConvexPolygon":
        """Build from vertices given in either orientation."""
        v = np.asarray(pts, dtype=float)
        if len(v) >= 3 and _shoelace(v) < 0:
            v = v[::-1]
        return cls(v)

    @classmethod
    def box(cls, x0, y0, x1, y1) -> "ConvexPolygon":
        return cls(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    @cached_property
    def outward_normals(self) -> np.ndarray:
        e = np.roll(self.vertices, -1, axis=0) - self.vertices
        n = np.column_stack([e[:, 1], -e[:, 0]])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.outward_normals, self.vertices)

    def area(self) -> float:
        return _shoelace(self.vertices)

    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)))

    def implicit(self, q) -> np.ndarray:
        """Signed distance to the nearest edge line; <= 0 inside."""
        q = np.asarray(q, dtype=float)
        return np.max(q @ self.outward_normals.T - self.offsets, axis=-1)

    def contains(self, q, tol: float = 1e-9) -> bool:
        return bool(self.implicit(as_point(q)) <= tol)


def _shoelace(v: np.ndarray) -> float:
    return 0.5 * float(np.sum(_cross(v, np.roll(v, -1, axis=0))))


def _gauss_nodes(edges):
    lo, hi = edges[:-1], edges[1:]
    h = (hi - lo)[:, None]
    t = (lo[:, None] + h * _GL01_NODES[None, :]).ravel()
    w = (h * _GL01_WEIGHTS[None, :]).ravel()
    return t, w


class Line:
    """Straight segment p0 -> p1 parametrised by s in [0, 1]."""

    closed = False
    gauss_nodes = staticmethod(_gauss_nodes)

    def __init__(self, p0, p1):
        self.p0 = as_point(p0)
        self.p1 = as_point(p1)
        self.d = self.p1 - self.p0

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.p0 + t[..., None] * self.d

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.d, t.shape + (2,)).copy()

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + (2,))

    def sample_params(self, t0, t1, n):
        return np.linspace(t0, t1, n)

    def panel_length(self, eps_arc):
        return math.inf


@dataclass(frozen=True, eq=False)
class Disk:
    center: np.ndarray
    radius: float

    closed = True
    gauss_nodes = staticmethod(_gauss_nodes)

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise GeometryError(f"invalid disk radius {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def is_empty(self) -> bool:
        return self.radius <= 0.0

    def area(self) -> float:
        return math.pi * self.radius**2

    # parametric boundary, counter-clockwise in t
    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.center + self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return self.radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        return -self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def implicit(self, q):
        d = np.asarray(q, dtype=float) - self.center
        return np.hypot(d[..., 0], d[..., 1]) - self.radius

    def param_of(self, q) -> float:
        d = np.asarray(q, dtype=float) - self.center
        return math.atan2(d[1], d[0])

    def sample_params(self, t0, t1, n):
        return np.linspace(t0, t1, n)

    def panel_length(self, eps_arc):
        return math.sqrt(8.0 * eps_arc * self.radius)

    def intersect_line(self, p0, p1) -> list[float]:
        d = p1 - p0
        w = p0 - self.center
        A = d @ d
        B = 2.0 * (w @ d)
        C = w @ w - self.radius**2
        return _quadratic_roots(A, B, C)


class Side(enum.Enum):
    TOWARD_I = -1
    TOWARD_J = 1


@dataclass(frozen=True, eq=False)
class HyperbolaBranch:
    """One branch of the hyperbola with foci ``focus_i`` and ``focus_j``.

    Points satisfy ``|q - far| - |q - near| = 2a`` where *near* is the focus
    selected by ``side``.  In the frame centred at the foci midpoint with
    the x-axis pointing from ``focus_i`` to ``focus_j`` the branch is
    ``(side * a cosh t, b sinh t)``.
    """

    focus_i: np.ndarray
    focus_j: np.ndarray
    a: float
    side: Side = Side.TOWARD_I

    closed = False

    def __post_init__(self):
        fi, fj = as_point(self.focus_i), as_point(self.focus_j)
        object.__setattr__(self, "focus_i", fi)
        object.__setattr__(self, "focus_j", fj)
        d = fj - fi
        dist = float(np.hypot(*d))
        c = 0.5 * dist
        a = float(self.a)
        if a < 0 or a >= c:
            raise OverlappingDisks(f"need 0 <= a < c, got a={a}, c={c}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", math.sqrt((c - a) * (c + a)))
        object.__setattr__(self, "theta", math.atan2(d[1], d[0]))
        e = d / dist
        object.__setattr__(self, "axis", e)
        object.__setattr__(self, "normal_axis", np.array([-e[1], e[0]]))
        object.__setattr__(self, "midpoint", 0.5 * (fi + fj))

    @property
    def sign(self) -> int:
        return self.side.value

    @property
    def near_focus(self) -> np.ndarray:
        return self.focus_i if self.side is Side.TOWARD_I else self.focus_j

    @property
    def far_focus(self) -> np.ndarray:
        return self.focus_j if self.side is Side.TOWARD_I else self.focus_i

    def _frame(self, u, v):
        return u[..., None] * self.axis + v[..., None] * self.normal_axis

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.midpoint + self._frame(self.sign * self.a * np.cosh(t), self.b * np.sinh(t))

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return self._frame(self.sign * self.a * np.sinh(t), self.b * np.cosh(t))

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        return self._frame(self.sign * self.a * np.cosh(t), self.b * np.sinh(t))

    def implicit(self, q):
        """<= 0 on the closed convex side containing the near focus."""
        q = np.asarray(q, dtype=float)
        dn, df = q - self.near_focus, q - self.far_focus
        return (np.hypot(dn[..., 0], dn[..., 1]) - np.hypot(df[..., 0], df[..., 1])
                + 2.0 * self.a)

    def distance_difference(self, q):
        q = np.asarray(q, dtype=float)
        return (np.linalg.norm(q - self.far_focus, axis=-1)
                - np.linalg.norm(q - self.near_focus, axis=-1))

    def local(self, q):
        d = np.asarray(q, dtype=float) - self.midpoint
        return d @ self.axis, d @ self.normal_axis

    def param_of(self, q) -> float:
        _, v = self.local(q)
        return math.asinh(v / self.b)

    @property
    def ccw(self) -> bool:
        # increasing t runs counter-clockwise around the near-focus side
        return self.side is Side.TOWARD_I

    def sample_params(self, t0, t1, n):
        # uniform in sinh(t) keeps the arc-length spacing bounded by (c/b) * dw
        return np.arcsinh(np.linspace(math.sinh(t0), math.sinh(t1), n))

    def gauss_nodes(self, edges):
        # integrate in w = sinh(t), where the branch is algebraic and smooth
        w, wt = _gauss_nodes(np.sinh(edges))
        return np.arcsinh(w), wt / np.sqrt(1.0 + w * w)

    def panel_length(self, eps_arc):
        if self.a <= 0:
            return math.inf
        return math.sqrt(8.0 * eps_arc * self.b**2 / self.a)

    def intersect_line(self, p0, p1) -> list[float]:
        x0, y0 = self.local(p0)
        dx, dy = (p1 - p0) @ self.axis, (p1 - p0) @ self.normal_axis
        a2, b2 = self.a**2, self.b**2
        A = b2 * dx * dx - a2 * dy * dy
        B = 2.0 * (b2 * x0 * dx - a2 * y0 * dy)
        C = b2 * x0 * x0 - a2 * y0 * y0 - a2 * b2
        roots = []
        for s in _quadratic_roots(A, B, C):
            x = x0 + s * dx
            if self.sign * x >= -1e-12 * (1.0 + self.c):
                roots.append(s)
        return roots


def _quadratic_roots(A, B, C) -> list[float]:
    scale = max(abs(A), abs(B), abs(C))
    if scale == 0.0:
        return []
    A, B, C = A / scale, B / scale, C / scale
    if abs(A) < 1e-14:
        if abs(B) < 1e-14:
            return []
        return [-C / B]
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        if disc > -1e-12 * (B * B + abs(4.0 * A * C)):
            disc = 0.0
        else:
            return []
    sq = math.sqrt(disc)
    q = -0.5 * (B + math.copysign(sq, B))
    r1 = q / A
    r2 = C / q if q != 0.0 else r1
    return sorted({r1, r2})


def hyperbola_branch(di: Disk, dj: Disk, side: Side = Side.TOWARD_I) -> HyperbolaBranch:
    """Boundary of the region guaranteed closer to disk ``di`` than ``dj``.

    Raises OverlappingDisks when the disks touch or overlap.
    """
    dist = float(np.hypot(*(dj.center - di.center)))
    if dist <= di.radius + dj.radius:
        raise OverlappingDisks(
            f"disks overlap: distance {dist} <= radii sum {di.radius + dj.radius}")
    return HyperbolaBranch(di.center, dj.center, 0.5 * (di.radius + dj.radius), side)


def sample_branch(h: HyperbolaBranch, t_min: float, t_max: float, n: int) -> np.ndarray:
    """``n`` points of the branch at uniformly spaced parameters."""
    if n < 2 or not t_min < t_max:
        raise ValueError("need n >= 2 and t_min < t_max")
    return h.point(np.linspace(t_min, t_max, n))


# ---------------------------------------------------------------------------
# curved regions


class Tag(NamedTuple):
    """Origin of a boundary piece: ``omega``, ``sensing`` or ``hyperbolic``."""

    kind: str
    i: int = -1
    j: int = -1


OMEGA_EDGE = Tag("omega")


def sensing_tag(i: int) -> Tag:
    return Tag("sensing", i)


def hyperbolic_tag(i: int, j: int) -> Tag:
    return Tag("hyperbolic", i, j)


@dataclass(frozen=True, eq=False)
class Segment:
    """Piece of ``curve`` traversed from parameter ``t0`` to ``t1``."""

    curve: object
    t0: float
    t1: float
    tag: Tag

    @property
    def is_line(self) -> bool:
        return isinstance(self.curve, Line)

    @property
    def start(self) -> np.ndarray:
        return self.curve.point(self.t0)

    @property
    def end(self) -> np.ndarray:
        return self.curve.point(self.t1)

    def samples(self, n: int = _ARC_SAMPLES) -> np.ndarray:
        return self.curve.sample_params(self.t0, self.t1, n)

    def length(self) -> float:
        _, _, dq = quadrature_nodes(self)
        return float(np.sum(np.hypot(dq[:, 0], dq[:, 1])))

    @cached_property
    def coarse(self) -> np.ndarray:
        """A few boundary points including both ends."""
        if self.is_line:
            return np.array([self.start, self.end])
        return self.curve.point(self.samples(17))

    @cached_property
    def bounding_circle(self) -> tuple[np.ndarray, float]:
        pts = self.coarse
        centre = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
        if self.is_line:
            return centre, 0.5 * float(np.hypot(*(pts[1] - pts[0]))) + 1e-12
        d = np.diff(pts, axis=0)
        margin = 0.5 * float(np.max(np.hypot(d[:, 0], d[:, 1])))
        return centre, float(np.max(np.hypot(*(pts - centre).T))) + margin + 1e-9

    @cached_property
    def _approx_length(self) -> float:
        d = np.diff(self.coarse, axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    @cached_property
    def _quad_cache(self) -> dict:
        return {}

    def panel_edges(self, eps_arc: float = EPS_ARC) -> np.ndarray:
        """Parameter breakpoints such that each panel's sagitta is <= eps_arc."""
        lp = self.curve.panel_length(eps_arc)
        if not math.isfinite(lp):
            return np.array([self.t0, self.t1], dtype=float)
        n = max(1, math.ceil(self._approx_length / lp))
        return self.curve.sample_params(self.t0, self.t1, n + 1)

    def outward_normals(self, t) -> np.ndarray:
        """Right-hand normal of the traversal direction (outward for CCW loops)."""
        d = self.curve.deriv(t) * math.copysign(1.0, self.t1 - self.t0)
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)


def quadrature_nodes(seg: Segment, eps_arc: float = EPS_ARC):
    """Gauss-Legendre nodes along ``seg``.

    Returns ``(params, points, dq)`` where ``dq`` is the curve derivative
    times the signed parameter weight, so ``sum(f * |dq|)`` approximates the
    arc-length integral and ``sum(cross(p, dq))`` the signed area form.
    """
    cache = seg._quad_cache
    if eps_arc not in cache:
        t, w = seg.curve.gauss_nodes(seg.panel_edges(eps_arc))
        cache[eps_arc] = (t, seg.curve.point(t), seg.curve.deriv(t) * w[:, None])
    return cache[eps_arc]


@dataclass(frozen=True, eq=False)
class CurvedRegion:
    """Closed convex region bounded by a counter-clockwise loop of segments.

    ``constraints`` lists the convex sets (each with an ``implicit``
    function, <= 0 inside) whose intersection the region is.
    """

    segments: tuple = ()
    constraints: tuple = ()

    @classmethod
    def from_polygon(cls, poly: ConvexPolygon, tag: Tag = OMEGA_EDGE) -> "CurvedRegion":
        segs = tuple(Segment(Line(p, q), 0.0, 1.0, tag) for p, q in poly.edges)
        return cls(segs, (poly,))

    @classmethod
    def from_disk(cls, d: Disk, tag: Tag) -> "CurvedRegion":
        if d.is_empty:
            return EMPTY
        return cls((Segment(d, 0.0, 2.0 * math.pi, tag),), (d,))

    @property
    def is_empty(self) -> bool:
        return not self.segments

    def contains(self, q, tol: float = 1e-9) -> bool:
        if self.is_empty:
            return False
        q = as_point(q)
        return all(float(c.implicit(q)) <= tol for c in self.constraints)

    def contains_many(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        inside = np.ones(len(q), dtype=bool)
        if self.is_empty:
            return ~inside
        for c in self.constraints:
            inside &= c.implicit(q) <= 0.0
        return inside

    def segments_with(self, kind: str, i: int | None = None, j: int | None = None):
        for s in self.segments:
            if s.tag.kind == kind and (i is None or s.tag.i == i) and (j is None or s.tag.j == j):
                yield s

    def polyline(self, eps_arc: float = EPS_ARC) -> np.ndarray:
        """Boundary flattened to a closed polygon (last vertex not repeated)."""
        if self.is_empty:
            return np.zeros((0, 2))
        chunks = [s.curve.point(s.panel_edges(eps_arc)[:-1]) for s in self.segments]
        return np.vstack(chunks)

    def area(self, eps_arc: float = EPS_ARC) -> float:
        return region_area_integral(self, None, eps_arc)

    @cached_property
    def bounding_circle(self) -> tuple[np.ndarray, float]:
        """Centre and radius of a circle enclosing the region."""
        circles = [s.bounding_circle for s in self.segments]
        cs = np.array([c for c, _ in circles])
        rs = np.array([r for _, r in circles])
        centre = 0.5 * ((cs - rs[:, None]).min(axis=0) + (cs + rs[:, None]).max(axis=0))
        return centre, float(np.max(np.hypot(*(cs - centre).T) + rs))


    def closure_gap(self) -> float:
        """Largest distance between consecutive segment end and start points."""
        if self.is_empty:
            return 0.0
        segs = self.segments
        return max(float(np.hypot(*(segs[k].end - segs[(k + 1) % len(segs)].start)))
                   for k in range(len(segs)))


EMPTY = CurvedRegion()


# --- clipping ---------------------------------------------------------------


def _line_roots(seg: Segment, curve) -> list[float]:
    line = seg.curve
    lo, hi = sorted((seg.t0, seg.t1))
    return [s for s in curve.intersect_line(line.p0, line.p1) if lo < s < hi]


def _arc_roots(seg: Segment, curve, ts: np.ndarray, f: np.ndarray) -> list[float]:
    def g(t):
        return float(curve.implicit(seg.curve.point(t)))

    roots = []
    for k in np.flatnonzero(f[:-1] * f[1:] < 0.0):
        roots.append(brentq(g, ts[k], ts[k + 1], xtol=ROOT_XTOL))
    for k in np.flatnonzero(f[1:-1] == 0.0) + 1:
        roots.append(float(ts[k]))
    # a pair of crossings can hide between two samples of equal sign
    df = np.abs(np.diff(f))
    for k in range(1, len(f) - 1):
        fk = f[k]
        if fk == 0.0:
            continue
        s = 1.0 if fk > 0 else -1.0
        if s * fk > s * f[k - 1] or s * fk > s * f[k + 1]:
            continue
        if abs(fk) > df[k - 1] + df[k]:
            continue
        lo, hi = sorted((ts[k - 1], ts[k + 1]))
        res = minimize_scalar(lambda t: s * g(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        if s * res.fun < 0.0:
            tm = float(res.x)
            for a_, b_ in ((ts[k - 1], tm), (tm, ts[k + 1])):
                if g(a_) * g(b_) < 0.0:
                    roots.append(brentq(g, a_, b_, xtol=ROOT_XTOL))
    return roots


def _line_pieces(seg: Segment, curve):
    roots = sorted(set(_line_roots(seg, curve)))
    if seg.t1 < seg.t0:
        roots = roots[::-1]
    bounds = [seg.t0, *roots, seg.t1]
    out = []
    for ta, tb in zip(bounds[:-1], bounds[1:]):
        if ta == tb:
            continue
        inside = float(curve.implicit(seg.curve.point(0.5 * (ta + tb)))) <= 0.0
        if inside and abs(tb - ta) * np.hypot(*seg.curve.d) < 1e-12:
            inside = False
        out.append((seg, ta, tb, inside))
    return out


def _pieces(seg: Segment, curve):
    """Split ``seg`` at its crossings with ``curve``; classify each piece."""
    if seg.is_line:
        return _line_pieces(seg, curve)
    rel = _circle_relation(*seg.bounding_circle, curve)
    if rel is not None:
        return [(seg, seg.t0, seg.t1, rel == "inside")]
    ts = seg.samples()
    f = curve.implicit(seg.curve.point(ts))
    roots = _arc_roots(seg, curve, ts, f)
    direction = 1.0 if seg.t1 >= seg.t0 else -1.0
    roots = sorted(set(roots), key=lambda t: direction * t)
    bounds = [seg.t0, *roots, seg.t1]
    out = []
    for ta, tb in zip(bounds[:-1], bounds[1:]):
        if ta == tb:
            continue
        lo, hi = sorted((ta, tb))
        sel = (ts > lo) & (ts < hi)
        if np.any(sel):
            fs = f[sel]
            val = fs[np.argmax(np.abs(fs))]
        else:
            val = float(curve.implicit(seg.curve.point(0.5 * (ta + tb))))
        inside = val <= 0.0
        if inside and np.hypot(*(seg.curve.point(ta) - seg.curve.point(tb))) < 1e-12:
            inside = False
        out.append((seg, ta, tb, inside))
    return out


def _circle_relation(centre, rad: float, curve) -> str | None:
    """'inside' or 'outside' when the whole circle lies on one side of ``curve``."""
    if isinstance(curve, Disk):
        d = float(np.hypot(*(centre - curve.center)))
        if d + rad <= curve.radius:
            return "inside"
        if d >= curve.radius + rad:
            return "outside"
        return None
    dn = float(np.hypot(*(centre - curve.near_focus)))
    df = float(np.hypot(*(centre - curve.far_focus)))
    if dn - df + 2.0 * curve.a + 2.0 * rad <= 0.0:
        return "inside"
    if dn - df + 2.0 * curve.a - 2.0 * rad > 0.0:
        return "outside"
    return None


def _quick_relation(region: CurvedRegion, curve) -> str | None:
    return _circle_relation(*region.bounding_circle, curve)


def _clip(region: CurvedRegion, curve, tag: Tag) -> CurvedRegion:
    if region.is_empty:
        return region
    quick = _quick_relation(region, curve)
    if quick == "inside":
        return region
    if quick == "outside":
        return EMPTY
    constraints = region.constraints + (curve,)
    pieces = [p for seg in region.segments for p in _pieces(seg, curve)]
    flags = [p[3] for p in pieces]
    if all(flags):
        return CurvedRegion(region.segments, constraints)
    if not any(flags):
        if isinstance(curve, Disk) and region.contains(curve.center):
            return CurvedRegion((Segment(curve, 0.0, 2.0 * math.pi, tag),), constraints)
        return EMPTY
    start = next(k for k in range(len(pieces)) if flags[k] and not flags[k - 1])
    pieces = pieces[start:] + pieces[:start]

    out = []
    k = 0
    n = len(pieces)
    while k < n:
        seg, ta, tb, inside = pieces[k]
        if inside:
            # merge consecutive inside pieces of the same segment
            while k + 1 < n and pieces[k + 1][3] and pieces[k + 1][0] is seg:
                tb = pieces[k + 1][2]
                k += 1
            out.append(Segment(seg.curve, ta, tb, seg.tag))
            k += 1
            continue
        exit_pt = pieces[k - 1][0].curve.point(pieces[k - 1][2])
        while k < n and not pieces[k][3]:
            k += 1
        nxt = pieces[k % n]
        entry_pt = nxt[0].curve.point(nxt[1])
        tp, tq = curve.param_of(exit_pt), curve.param_of(entry_pt)
        if isinstance(curve, Disk):
            tq = tp + (tq - tp) % (2.0 * math.pi)
        if tq != tp:
            out.append(Segment(curve, tp, tq, tag))
    return CurvedRegion(tuple(out), constraints)


def clip_halfregion(region: CurvedRegion, h: HyperbolaBranch,
                    tag: Tag = Tag("hyperbolic")) -> CurvedRegion:
    """Intersect ``region`` with the convex side of ``h`` (near-focus side)."""
    return _clip(region, h, tag)


def clip_disk(region: CurvedRegion, d: Disk, tag: Tag = Tag("sensing")) -> CurvedRegion:
    """Intersect ``region`` with the closed disk ``d``."""
    if d.is_empty:
        return EMPTY
    return _clip(region, d, tag)


# --- quadrature ------------------------------------------------------------


def _interior_point(region: CurvedRegion) -> np.ndarray:
    pts = np.vstack([s.curve.point(s.samples(9)[:-1]) for s in region.segments])
    return pts.mean(axis=0)


def region_area_integral(region: CurvedRegion, phi=None, eps_arc: float = EPS_ARC) -> float:
    """Integral of ``phi`` over the region (area when ``phi`` is None).

    The region is swept as a fan of curved triangles from an interior
    point: each boundary node ``p`` contributes the ray ``p0 -> p``, so the
    curved boundary enters the quadrature exactly.  ``phi`` is any callable
    mapping an (m, 2) array to (m,) values; objects exposing a float
    ``uniform_value`` take the closed-form radial integral.
    """
    if region.is_empty:
        return 0.0
    p0 = _interior_point(region)
    uniform = 1.0 if phi is None else getattr(phi, "uniform_value", None)
    total = 0.0
    for seg in region.segments:
        _, pts, dq = quadrature_nodes(seg, eps_arc)
        jac = _cross(pts - p0, dq)
        if uniform is not None:
            total += 0.5 * uniform * float(np.sum(jac))
        else:
            lam = _GL01_NODES
            q = p0 + lam[None, :, None] * (pts - p0)[:, None, :]
            vals = np.asarray(phi(q.reshape(-1, 2)), dtype=float).reshape(len(pts), len(lam))
            total += float(jac @ ((vals * lam[None, :]) @ _GL01_WEIGHTS))
    return total


def line_integral(seg: Segment, f: Callable, eps_arc: float = EPS_ARC) -> np.ndarray:
    """Arc-length integral of ``f(points, normals)`` along ``seg``.

    ``f`` receives (m, 2) points and outward unit normals and returns
    (m,), (m, 2) or (m, 2, 2) values.
    """
    t, pts, dq = quadrature_nodes(seg, eps_arc)
    ds = np.linalg.norm(dq, axis=1)
    vals = np.asarray(f(pts, seg.outward_normals(t)), dtype=float)
    return np.tensordot(ds, vals, axes=(0, 0))


# --- polygons --------------------------------------------------------------


def clip_polygon_halfplane(v: np.ndarray, n: np.ndarray, h: float) -> np.ndarray:
    """Sutherland-Hodgman step keeping ``{x: n.x <= h}``."""
    if len(v) == 0:
        return v
    out = []
    s = v @ n - h
    for k in range(len(v)):
        p, q = v[k], v[(k + 1) % len(v)]
        sp, sq = s[k], s[(k + 1) % len(v)]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            out.append(p + (q - p) * (sp / (sp - sq)))
    return np.array(out).reshape(-1, 2)


def _dedupe(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    keep = []
    for p in v:
        if not keep or np.hypot(*(p - keep[-1])) > tol:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol:
        keep.pop()
    # drop collinear vertices
    changed = True
    while changed and len(keep) >= 3:
        changed = False
        for k in range(len(keep)):
            a, b, c = keep[k - 1], keep[k], keep[(k + 1) % len(keep)]
            if abs(_cross(b - a, c - b)) <= tol * (1.0 + np.hypot(*(c - a))):
                keep.pop(k)
                changed = True
                break
    return np.array(keep).reshape(-1, 2)


def minkowski_erode(poly: ConvexPolygon, r: float) -> ConvexPolygon:
    """Points whose closed r-disk fits inside ``poly``."""
    if r < 0:
        raise ValueError("erosion radius must be non-negative")
    if r == 0:
        return poly
    v = poly.vertices.copy()
    for n, h in zip(poly.outward_normals, poly.offsets):
        v = clip_polygon_halfplane(v, n, h - r)
    v = _dedupe(v)
    if len(v) < 3 or _shoelace(v) <= 1e-14 * max(1.0, poly.area()):
        raise EmptyErosion(f"offset by {r} leaves nothing of the polygon")
    return ConvexPolygon(v)


def polygon_tangent_project(poly: ConvexPolygon, q, u, eps: float,
                            slack: float = 1e-9) -> np.ndarray:
    """Remove the outward component of ``u`` at boundary point ``q``.

    Returns ``u`` unchanged when ``q`` is interior or ``q + eps*u`` stays
    inside.  On an edge, ``u`` is projected onto the edge direction; at a
    vertex the projection onto each adjacent edge is tried and the first
    admissible one kept, otherwise zero.
    """
    q, u = as_point(q), np.asarray(u, dtype=float)
    normals, offsets = poly.outward_normals, poly.offsets
    dist = q @ normals.T - offsets
    active = np.flatnonzero(dist >= -slack)
    if len(active) == 0 or poly.contains(q + eps * u, tol=0.0):
        return u
    candidates = []
    for k in active:
        n = normals[k]
        candidates.append(u - (u @ n) * n)
    best = None
    for cand in candidates:
        if all(normals[k] @ cand <= 1e-12 for k in active):
            if best is None or cand @ u > best @ u:
                best = cand
    return np.zeros(2) if best is None else best


def exit_fraction(poly: ConvexPolygon, q, step) -> float:
    """Largest lambda in [0, 1] with ``q + lambda*step`` inside ``poly``."""
    q, step = as_point(q), np.asarray(step, dtype=float)
    lam = 1.0
    for n, h in zip(poly.outward_normals, poly.offsets):
        rate = n @ step
        if rate > 0.0:
            room = h - n @ q
            lam = min(lam, max(0.0, room / rate))
    return lam
