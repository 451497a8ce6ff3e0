"""Coverage control of uncertain mobile agents over guaranteed Voronoi cells."""

from .agents import Agent, guaranteed_sensing_disk, integrate
from .control import (ControlGains, MissingNeighborCell, OutsideRegion, branch_jacobian,
                      branch_normal, constrain, optimal_law, suboptimal_law)
from .geometry import (ConvexPolygon, CurvedRegion, Disk, EmptyErosion, GeometryError,
                       HyperbolaBranch, NotConvexError, OverlappingDisks, Side, clip_disk,
                       clip_halfregion, hyperbola_branch, line_integral, minkowski_erode,
                       region_area_integral, sample_branch)
from .objective import CoverageReport, Grid, ScalarField, Uniform, coverage
from .partition import (DuplicatePoints, NeighborSets, Partition, build_partition,
                        delaunay_neighbors, guaranteed_neighbors, gv_cell)
from .sim import (DriveCommand, SimConfig, SimState, WaypointParams, diff_drive_command, run,
                  simulate, step, waypoint_tracking_run)

__version__ = "0.1.0"
