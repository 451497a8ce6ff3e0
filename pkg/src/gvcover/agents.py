"""Agent state and single-integrator kinematics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .geometry import Disk, as_point


@dataclass(frozen=True, eq=False)
class Agent:
    """A mobile agent as seen by the rest of the network.

    ``q`` is the reported position and ``r_u`` bounds the localisation
    error around it.  ``r_u_sensing`` optionally overrides the uncertainty
    used for the guaranteed sensed disk; it lets the partition and the
    containment constraint work with an inflated radius (e.g. the robot
    footprint) while sensing uses the true positioning error.
    """

    id: int
    q: np.ndarray
    r_u: float
    r_s: float
    r_u_sensing: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "q", as_point(self.q))
        if self.r_u < 0:
            raise ValueError(f"agent {self.id}: negative uncertainty radius")
        if self.r_s <= 0:
            raise ValueError(f"agent {self.id}: sensing radius must be positive")
        if self.r_u_sensing is not None and self.r_u_sensing < 0:
            raise ValueError(f"agent {self.id}: negative sensing uncertainty")

    @property
    def uncertainty_disk(self) -> Disk:
        return Disk(self.q, self.r_u)

    @property
    def gsr_radius(self) -> float:
        r_u = self.r_u if self.r_u_sensing is None else self.r_u_sensing
        return max(self.r_s - r_u, 0.0)

    def moved_to(self, q) -> "Agent":
        return dataclasses.replace(self, q=as_point(q))


def guaranteed_sensing_disk(a: Agent) -> Disk:
    """Disk sensed for every possible true position of ``a``.

    An agent whose uncertainty exceeds its sensing range gets a radius-0
    disk, which the rest of the library treats as empty.
    """
    return Disk(a.q, a.gsr_radius)


def integrate(a: Agent, u, dt: float) -> Agent:
    """Explicit Euler step of ``q' = u``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return a.moved_to(a.q + dt * np.asarray(u, dtype=float))
