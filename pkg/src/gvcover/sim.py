"""Time-stepped coverage simulation and the differential-drive adapter."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .agents import Agent, integrate
from .control import ControlGains, constrain, optimal_law, suboptimal_law
from .geometry import EPS_ARC, ConvexPolygon, exit_fraction, minkowski_erode
from .objective import CoverageReport, ScalarField, Uniform, coverage
from .partition import Partition, build_partition

log = logging.getLogger(__name__)

LAWS = ("optimal", "suboptimal")
MODES = ("gradient", "waypoint")
STEP_CONTROLS = ("fixed", "monotone")


@dataclass(frozen=True)
class WaypointParams:
    """Settings of the target-point tracking loop run on unicycle robots."""

    d_t: float = 0.02
    period: float = 0.1
    v_max: float = 0.5
    omega_max: float = math.pi / 2
    headings: tuple | None = None
    max_inner: int = 400


@dataclass(frozen=True, eq=False)
class SimConfig:
    region: ConvexPolygon
    agents: tuple
    phi: ScalarField = Uniform(1.0)
    law: str = "optimal"
    dt: float = 0.01
    alpha: float = 1.0
    max_steps: int = 20000
    conv_tol: float = 1e-4
    eps_arc: float = EPS_ARC
    eps_probe: float = 1e-6
    seed: int = 0
    waypoint: WaypointParams = WaypointParams()
    snapshots: tuple = ()
    name: str = "scenario"
    mode: str = "gradient"
    step_control: str = "fixed"
    min_dt: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.law not in LAWS:
            raise ValueError(f"law must be one of {LAWS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.step_control not in STEP_CONTROLS:
            raise ValueError(f"step_control must be one of {STEP_CONTROLS}")
        if not 0 < self.min_dt <= self.dt:
            raise ValueError("min_dt must lie in (0, dt]")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.conv_tol < 0:
            raise ValueError("conv_tol must be non-negative")

    @property
    def gains(self) -> ControlGains:
        return ControlGains(self.alpha, self.eps_probe)

    def with_law(self, law: str) -> "SimConfig":
        return dataclasses.replace(self, law=law)


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    positions: dict
    controls: dict
    H: float
    fraction: float
    guaranteed: dict
    two_hop: dict


@dataclass(eq=False)
class SimState:
    t: float
    agents: tuple
    partition: Partition
    report: CoverageReport
    history: list = field(default_factory=list)
    converged: bool = False
    headings: dict | None = None

    @property
    def steps(self) -> int:
        return len(self.history)

    def h_series(self) -> np.ndarray:
        """Objective at the start of every step followed by the current value."""
        return np.array([r.H for r in self.history] + [self.report.total])

    def fraction_series(self) -> np.ndarray:
        return np.array([r.fraction for r in self.history] + [self.report.fraction])


class _ErodedRegions:
    def __init__(self, region: ConvexPolygon):
        self.region = region
        self._cache: dict[float, ConvexPolygon] = {}

    def __call__(self, r_u: float) -> ConvexPolygon:
        if r_u not in self._cache:
            self._cache[r_u] = minkowski_erode(self.region, r_u)
        return self._cache[r_u]


def initial_state(config: SimConfig) -> SimState:
    part = build_partition(config.agents, config.region, config.eps_arc)
    return SimState(0.0, config.agents, part, coverage(part, config.phi, config.eps_arc))


def compute_controls(state: SimState, config: SimConfig, eroded=None) -> dict:
    """Constrained velocity of every agent from the current partition."""
    eroded = eroded or _ErodedRegions(config.region)
    law = optimal_law if config.law == "optimal" else suboptimal_law
    gains = config.gains
    out = {}
    for a in state.agents:
        u = law(a.id, state.partition, config.phi, gains, config.eps_arc)
        out[a.id] = constrain(a.id, u, a.q, eroded(a.r_u), gains)
    return out


def _record(state: SimState, controls: dict) -> StepRecord:
    ns = state.partition.neighbor_sets
    return StepRecord(
        step=len(state.history), t=state.t,
        positions={a.id: (float(a.q[0]), float(a.q[1])) for a in state.agents},
        controls={i: (float(u[0]), float(u[1])) for i, u in controls.items()},
        H=state.report.total, fraction=state.report.fraction,
        guaranteed={i: tuple(sorted(s)) for i, s in ns.guaranteed.items()},
        two_hop={i: tuple(sorted(s)) for i, s in ns.two_hop.items()},
    )


def _rebuild(state: SimState, agents, config: SimConfig, dt: float) -> SimState:
    part = build_partition(agents, config.region, config.eps_arc)
    return SimState(state.t + dt, tuple(agents), part,
                    coverage(part, config.phi, config.eps_arc), state.history,
                    state.converged, state.headings)


def _advance(state: SimState, config: SimConfig, controls: dict, eroded, dt: float) -> SimState:
    moved = []
    for a in state.agents:
        u = controls[a.id]
        lam = exit_fraction(eroded(a.r_u), a.q, u * dt)
        moved.append(integrate(a, lam * u, dt) if lam > 0 else a)
    return _rebuild(state, moved, config, dt)


def step(state: SimState, config: SimConfig, controls: dict | None = None,
         eroded=None, dt: float | None = None) -> SimState:
    """Advance all agents synchronously by one Euler step of length ``dt``.

    A step that would carry an agent across the boundary of its eroded
    region is shortened so the agent stops on that boundary; the
    projection in ``constrain`` takes over on the next step.
    """
    eroded = eroded or _ErodedRegions(config.region)
    if controls is None:
        controls = compute_controls(state, config, eroded)
    new = _advance(state, config, controls, eroded, config.dt if dt is None else dt)
    state.history.append(_record(state, controls))
    return new


def monotone_step(state: SimState, config: SimConfig, controls: dict, eroded,
                  dt: float) -> tuple[SimState, float]:
    """Euler step whose length is halved until the objective does not drop.

    Returns the new state and the step length used.  Below ``min_dt`` the
    step is taken regardless.
    """
    while True:
        new = _advance(state, config, controls, eroded, dt)
        if new.report.total >= state.report.total or dt * 0.5 < config.min_dt:
            break
        dt *= 0.5
    if new.report.total < state.report.total:
        log.info("objective dropped by %.3g at the minimum step",
                 state.report.total - new.report.total)
    state.history.append(_record(state, controls))
    return new, dt


def run(config: SimConfig, callback=None) -> SimState:
    """Step until every control is below ``conv_tol`` or ``max_steps`` is hit.

    With ``step_control="monotone"`` each step is shortened until the
    objective does not decrease, and the next step may grow back by a
    factor of two up to ``dt``.
    """
    eroded = _ErodedRegions(config.region)
    state = initial_state(config)
    dt = config.dt
    for _ in range(config.max_steps):
        controls = compute_controls(state, config, eroded)
        if max(np.hypot(*u) for u in controls.values()) < config.conv_tol:
            state.converged = True
            break
        if config.step_control == "monotone":
            state, used = monotone_step(state, config, controls, eroded, dt)
            dt = min(config.dt, 2.0 * used)
        else:
            state = step(state, config, controls, eroded)
        if callback is not None:
            callback(state)
    return state


# --- differential drive ----------------------------------------------------


@dataclass(frozen=True)
class DriveCommand:
    v: float
    omega: float


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def diff_drive_command(q, theta: float, target, dt: float, v_max: float,
                       omega_max: float) -> DriveCommand:
    """Translational and rotational speed steering a unicycle to ``target``.

    Note the rotational command vanishes when the target is exactly behind
    the robot (sin of the heading error is zero there); the robot then
    reverses towards the target instead of turning.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    d = np.asarray(target, dtype=float) - np.asarray(q, dtype=float)
    dist = float(np.hypot(*d))
    if dist == 0.0:
        return DriveCommand(0.0, 0.0)
    dtheta = wrap_angle(math.atan2(d[1], d[0]) - theta)
    v = min(dist / dt, v_max) * math.cos(dtheta)
    omega = min(abs(dtheta) / dt, omega_max) * math.sin(dtheta)
    return DriveCommand(v, omega)


def unicycle_step(q, theta: float, cmd: DriveCommand, dt: float):
    """Exact pose after holding ``cmd`` for ``dt``."""
    x, y = float(q[0]), float(q[1])
    w = cmd.omega
    if abs(w) < 1e-12:
        return np.array([x + cmd.v * dt * math.cos(theta),
                         y + cmd.v * dt * math.sin(theta)]), theta
    th = theta + w * dt
    return (np.array([x + cmd.v / w * (math.sin(th) - math.sin(theta)),
                      y - cmd.v / w * (math.cos(th) - math.cos(theta))]),
            wrap_angle(th))


def waypoint_tracking_run(config: SimConfig, d_t: float | None = None,
                          callback=None) -> SimState:
    """Drive unicycle robots through target points produced by the chosen law.

    Each outer iteration rebuilds the partition, sets the target
    ``q + u * dt`` for every robot and issues drive commands every
    ``waypoint.period`` seconds until all robots are within ``d_t`` of their
    targets.  Robots already within ``d_t`` hold still.  The run stops when
    every target lies within ``d_t`` of its robot, when controls fall
    below ``conv_tol``, or after ``max_steps`` outer iterations.
    """
    wp = config.waypoint
    d_t = wp.d_t if d_t is None else d_t
    if d_t <= 0:
        raise ValueError("d_t must be positive")
    eroded = _ErodedRegions(config.region)
    state = initial_state(config)
    if wp.headings is not None:
        headings = {a.id: float(h) for a, h in zip(config.agents, wp.headings)}
    else:
        rng = np.random.default_rng(config.seed)
        headings = {a.id: float(h) for a, h in
                    zip(config.agents, rng.uniform(-math.pi, math.pi, len(config.agents)))}
    state.headings = dict(headings)
    for _ in range(config.max_steps):
        controls = compute_controls(state, config, eroded)
        if max(np.hypot(*u) for u in controls.values()) < config.conv_tol:
            state.converged = True
            break
        targets = {}
        for a in state.agents:
            u = controls[a.id] * config.dt
            targets[a.id] = a.q + exit_fraction(eroded(a.r_u), a.q, u) * u
        if all(np.hypot(*(targets[a.id] - a.q)) <= d_t for a in state.agents):
            state.converged = True
            break
        state.history.append(_record(state, controls))
        pos = {a.id: a.q for a in state.agents}
        elapsed = 0.0
        for _inner in range(wp.max_inner):
            if all(np.hypot(*(targets[i] - pos[i])) <= d_t for i in pos):
                break
            for a in state.agents:
                i = a.id
                if np.hypot(*(targets[i] - pos[i])) <= d_t:
                    continue
                cmd = diff_drive_command(pos[i], headings[i], targets[i], wp.period,
                                         wp.v_max, wp.omega_max)
                new_q, headings[i] = unicycle_step(pos[i], headings[i], cmd, wp.period)
                lam = exit_fraction(eroded(a.r_u), pos[i], new_q - pos[i])
                pos[i] = pos[i] + lam * (new_q - pos[i])
            elapsed += wp.period
        else:
            log.warning("robots did not reach their targets within %d periods", wp.max_inner)
        agents = [a.moved_to(pos[a.id]) for a in state.agents]
        state = _rebuild(state, agents, config, elapsed)
        state.headings = dict(headings)
        if callback is not None:
            callback(state)
    return state


def simulate(config: SimConfig, callback=None) -> SimState:
    """Run ``config`` in its configured mode."""
    if config.mode == "waypoint":
        return waypoint_tracking_run(config, callback=callback)
    return run(config, callback)
