"""Importance density and the guaranteed coverage objective."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import guaranteed_sensing_disk
from .geometry import EPS_ARC, CurvedRegion, region_area_integral, sensing_tag
from .partition import Partition


class ScalarField:
    """Non-negative importance density over the plane."""

    uniform_value: float | None = None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def scaled(self, k: float) -> "ScalarField":
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(ScalarField):
    value: float = 1.0

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("density must be finite and non-negative")

    @property
    def uniform_value(self) -> float:
        return self.value

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.full(pts.shape[:-1], self.value)

    def scaled(self, k):
        return Uniform(self.value * k)


@dataclass(frozen=True, eq=False)
class Grid(ScalarField):
    """Bilinear interpolation of samples on a regular grid.

    ``values[r, c]`` sits at ``origin + (c * cell_size, r * cell_size)``
    (row index along y).  Queries outside the grid use the nearest edge
    value.
    """

    origin: tuple[float, float]
    cell_size: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 2:
            raise ValueError("grid density needs at least 2x2 samples")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density must be finite and non-negative")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        nr, nc = self.values.shape
        gx = np.clip((pts[..., 0] - self.origin[0]) / self.cell_size, 0.0, nc - 1.0)
        gy = np.clip((pts[..., 1] - self.origin[1]) / self.cell_size, 0.0, nr - 1.0)
        c0 = np.minimum(np.floor(gx).astype(int), nc - 2)
        r0 = np.minimum(np.floor(gy).astype(int), nr - 2)
        fx, fy = gx - c0, gy - r0
        v = self.values
        return ((1 - fx) * (1 - fy) * v[r0, c0] + fx * (1 - fy) * v[r0, c0 + 1]
                + (1 - fx) * fy * v[r0 + 1, c0] + fx * fy * v[r0 + 1, c0 + 1])

    def scaled(self, k):
        return Grid(self.origin, self.cell_size, self.values * k)

    @classmethod
    def from_csv(cls, path) -> "Grid":
        """Load a grid written by :meth:`to_csv`.

        First row: ``origin_x,origin_y,cell_size``; then one row of values
        per grid row, lowest y first.
        """
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        head = [float(x) for x in rows[0]]
        if len(head) != 3:
            raise ValueError(f"{path}: header must be origin_x,origin_y,cell_size")
        values = np.array([[float(x) for x in r] for r in rows[1:]])
        return cls((head[0], head[1]), head[2], values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([repr(self.origin[0]), repr(self.origin[1]), repr(self.cell_size)])
            for row in self.values:
                w.writerow([repr(float(x)) for x in row])


@dataclass(frozen=True)
class CoverageReport:
    per_agent: dict
    total: float
    h_max: float

    @property
    def fraction(self) -> float:
        return self.total / self.h_max if self.h_max > 0 else 0.0


def coverage(partition: Partition, phi: ScalarField, eps_arc: float = EPS_ARC) -> CoverageReport:
    """Importance mass of each guaranteed-sensing cell, and the packing bound."""
    per_agent = {i: region_area_integral(cell, phi, eps_arc)
                 for i, cell in partition.gs_cells.items()}
    h_max = 0.0
    for a in partition.agents:
        disk = guaranteed_sensing_disk(a)
        if disk.is_empty:
            continue
        if phi.uniform_value is not None:
            h_max += phi.uniform_value * disk.area()
        else:
            h_max += region_area_integral(CurvedRegion.from_disk(disk, sensing_tag(a.id)),
                                          phi, eps_arc)
    return CoverageReport(per_agent, float(sum(per_agent.values())), h_max)
