"""Scenario files, output emission and the ``gvcover`` command line.

A scenario is a YAML mapping::

    name: case-study-1
    region: [[0, 0], [10, 0], [10, 10], [0, 10]]
    r_u: 0.1                 # defaults for agents that omit them
    r_s: 1.0
    agents:
      - {q: [2.0, 2.0]}
      - {id: 7, q: [2.7, 2.3], r_u: 0.05}
    phi: 1.0                 # or {uniform: 2.0} or {grid: density.csv}
    law: optimal             # optimal | suboptimal
    mode: gradient           # gradient | waypoint
    step_control: fixed      # fixed | monotone (halve dt until H does not drop)
    dt: 0.01
    waypoint: {d_t: 0.02, period: 0.1, v_max: 0.5, omega_max: 1.5708}

Everything except ``region`` and ``agents`` is optional; ``r_u`` defaults
to 0 and ``r_s`` to 1.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .agents import Agent
from .geometry import EPS_ARC, ConvexPolygon, EmptyErosion, GeometryError, minkowski_erode
from .objective import Grid, Uniform
from .partition import DuplicatePoints, Partition, build_partition
from .sim import LAWS, MODES, STEP_CONTROLS, SimConfig, SimState, WaypointParams, simulate

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

_TOP_KEYS = {"name", "region", "agents", "r_u", "r_s", "phi", "law", "mode", "dt", "alpha",
             "max_steps", "conv_tol", "eps_arc", "eps_probe", "seed", "snapshots", "waypoint",
             "step_control", "min_dt"}
_AGENT_KEYS = {"id", "q", "r_u", "r_s", "r_u_sensing"}
_WAYPOINT_KEYS = {"d_t", "period", "v_max", "omega_max", "headings", "max_inner"}


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    def __init__(self, path, line: int | None, msg: str):
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")


class ValidationError(ConfigError):
    pass


# --- loading -----------------------------------------------------------------


def _number(value, key: str, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ValidationError(f"{key} must be finite")
    if positive and not x > 0:
        raise ValidationError(f"{key} must be positive")
    if nonneg and x < 0:
        raise ValidationError(f"{key} must be non-negative")
    return x


def _point(value, key: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"{key} must be a pair [x, y]")
    return _number(value[0], key), _number(value[1], key)


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - allowed)
    if extra:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(map(str, extra))}")


def _phi(spec, base: Path):
    if spec is None:
        return Uniform(1.0)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Uniform(_number(spec, "phi", nonneg=True))
    if isinstance(spec, dict) and len(spec) == 1:
        if "uniform" in spec:
            return Uniform(_number(spec["uniform"], "phi.uniform", nonneg=True))
        if "grid" in spec:
            path = base / str(spec["grid"])
            try:
                return Grid.from_csv(path)
            except OSError as exc:
                raise ValidationError(f"phi.grid: cannot read {path}: {exc}") from exc
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"phi.grid: {exc}") from exc
    raise ValidationError("phi must be a number, {uniform: v} or {grid: file.csv}")


def _agents(raw: dict) -> list[Agent]:
    items = raw["agents"]
    if not isinstance(items, list) or not items:
        raise ValidationError("agents must be a non-empty list")
    default_ru, default_rs = raw.get("r_u", 0.0), raw.get("r_s", 1.0)
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise ValidationError(f"agents[{k}] must be a mapping")
        _unknown(item, _AGENT_KEYS, f"agents[{k}]")
        if "q" not in item:
            raise ValidationError(f"agents[{k}] needs a position q")
        r_s = item.get("r_s", default_rs)
        ident = item.get("id", k)
        if isinstance(ident, bool) or not isinstance(ident, int):
            raise ValidationError(f"agents[{k}].id must be an integer")
        r_us = item.get("r_u_sensing")
        a = Agent(ident, _point(item["q"], f"agents[{k}].q"),
                  _number(item.get("r_u", default_ru), f"agents[{k}].r_u", nonneg=True),
                  _number(r_s, f"agents[{k}].r_s", positive=True),
                  None if r_us is None else _number(r_us, f"agents[{k}].r_u_sensing",
                                                    nonneg=True))
        if a.r_u > a.r_s:
            warnings.warn(f"agent {a.id}: r_u > r_s, its guaranteed sensed region is empty",
                          stacklevel=2)
        out.append(a)
    ids = [a.id for a in out]
    if len(set(ids)) != len(ids):
        raise ValidationError("agent ids must be unique")
    return out


def _check_positions(region: ConvexPolygon, agents) -> None:
    for a in agents:
        try:
            inner = minkowski_erode(region, a.r_u)
        except EmptyErosion as exc:
            raise ValidationError(
                f"agent {a.id}: uncertainty disk does not fit in region") from exc
        if not inner.contains(a.q):
            raise ValidationError(f"agent {a.id}: uncertainty disk not inside region")
    pts = np.array([a.q for a in agents])
    for k in range(len(pts)):
        d = np.hypot(*(pts[k + 1:] - pts[k]).T)
        if np.any(d <= 1e-9):
            raise ValidationError(f"agent positions coincide (agent {agents[k].id})")


def config_from_dict(raw, base: Path = Path(".")) -> SimConfig:
    """Validate a parsed scenario mapping and fill in defaults."""
    if not isinstance(raw, dict):
        raise ValidationError("scenario must be a mapping")
    _unknown(raw, _TOP_KEYS, "scenario")
    for key in ("region", "agents"):
        if key not in raw:
            raise ValidationError(f"missing required key '{key}'")
    verts = raw["region"]
    if not isinstance(verts, list) or len(verts) < 3:
        raise ValidationError("region needs at least 3 vertices")
    try:
        region = ConvexPolygon.from_points([_point(v, "region vertex") for v in verts])
    except GeometryError as exc:
        raise ValidationError(str(exc)) from exc
    try:
        agents = _agents(raw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    _check_positions(region, agents)

    wp_raw = raw.get("waypoint") or {}
    if not isinstance(wp_raw, dict):
        raise ValidationError("waypoint must be a mapping")
    _unknown(wp_raw, _WAYPOINT_KEYS, "waypoint")
    wp_kwargs = {k: _number(v, f"waypoint.{k}", positive=True)
                 for k, v in wp_raw.items() if k not in ("headings", "max_inner")}
    if "headings" in wp_raw:
        hd = wp_raw["headings"]
        if not isinstance(hd, list) or len(hd) != len(agents):
            raise ValidationError("waypoint.headings needs one angle per agent")
        wp_kwargs["headings"] = tuple(_number(h, "waypoint.headings") for h in hd)
    if "max_inner" in wp_raw:
        wp_kwargs["max_inner"] = int(_number(wp_raw["max_inner"], "waypoint.max_inner",
                                             positive=True))

    law = raw.get("law", "optimal")
    if law not in LAWS:
        raise ValidationError(f"law must be one of {', '.join(LAWS)}")
    mode = raw.get("mode", "gradient")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {', '.join(MODES)}")
    step_control = raw.get("step_control", "fixed")
    if step_control not in STEP_CONTROLS:
        raise ValidationError(f"step_control must be one of {', '.join(STEP_CONTROLS)}")
    snaps = raw.get("snapshots", [])
    if not isinstance(snaps, list) or not all(isinstance(s, int) and s >= 0 for s in snaps):
        raise ValidationError("snapshots must be a list of non-negative step numbers")
    max_steps = _number(raw.get("max_steps", 20000), "max_steps")
    if max_steps < 1 or max_steps != int(max_steps):
        raise ValidationError("max_steps must be an integer >= 1")
    try:
        return SimConfig(
            region=region, agents=tuple(agents), phi=_phi(raw.get("phi"), base),
            law=law, mode=mode, step_control=step_control,
            min_dt=_number(raw.get("min_dt", 1e-6), "min_dt", positive=True),
            dt=_number(raw.get("dt", 0.01), "dt", positive=True),
            alpha=_number(raw.get("alpha", 1.0), "alpha", positive=True),
            max_steps=int(max_steps),
            conv_tol=_number(raw.get("conv_tol", 1e-4), "conv_tol", nonneg=True),
            eps_arc=_number(raw.get("eps_arc", EPS_ARC), "eps_arc", positive=True),
            eps_probe=_number(raw.get("eps_probe", 1e-6), "eps_probe", positive=True),
            seed=int(raw.get("seed", 0)),
            waypoint=WaypointParams(**wp_kwargs),
            snapshots=tuple(snaps),
            name=str(raw.get("name", "scenario")),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def load_config(path) -> SimConfig:
    """Read and validate a YAML scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file: {exc.strerror or exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(path, line, problem) from exc
    return config_from_dict(raw, path.parent)


# --- emission ----------------------------------------------------------------


@dataclass(frozen=True)
class RunOutputs:
    trajectory: Path
    h_series: Path
    snapshots: tuple
    summary: dict = field(default_factory=dict)


def _g(x: float) -> str:
    return f"{x:.17g}"


def _partition_at(state: SimState, step: int) -> Partition:
    if step >= state.steps:
        return state.partition
    pos = state.history[step].positions
    agents = [a.moved_to(pos[a.id]) for a in state.agents]
    return build_partition(agents, state.partition.region)


def _svg_path(pts: np.ndarray, closed=True) -> str:
    body = " L ".join(f"{x:.5f} {y:.5f}" for x, y in pts)
    return f"M {body}{' Z' if closed else ''}"


def render_svg(partition: Partition, size: int = 600, title: str = "") -> str:
    """SVG drawing of the region, GV cells (blue), GSRs (red) and uncertainty disks (black)."""
    v = partition.region.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    scale = size / (span + 2 * pad)
    w = (hi[0] - lo[0] + 2 * pad) * scale
    h = (hi[1] - lo[1] + 2 * pad) * scale
    tx, ty = (pad - lo[0]) * scale, (hi[1] + pad) * scale
    stroke = 1.5 / scale
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2f}" height="{h:.2f}" '
        f'viewBox="0 0 {w:.2f} {h:.2f}">',
        f"<title>{title}</title>",
        f'<g transform="matrix({scale:.6f} 0 0 {-scale:.6f} {tx:.6f} {ty:.6f})" '
        f'fill="none" stroke-width="{stroke:.6f}">',
        f'<path d="{_svg_path(v)}" stroke="#444444"/>',
    ]
    for i in sorted(partition.cells):
        cell = partition.cells[i]
        if not cell.is_empty:
            out.append(f'<path d="{_svg_path(cell.polyline(5e-3))}" stroke="blue"/>')
    for a in sorted(partition.agents, key=lambda a: a.id):
        x, y = a.q
        if a.gsr_radius > 0:
            out.append(f'<circle cx="{x:.5f}" cy="{y:.5f}" r="{a.gsr_radius:.5f}" stroke="red"/>')
        out.append(f'<circle cx="{x:.5f}" cy="{y:.5f}" r="{max(a.r_u, 0.5 * stroke):.5f}" '
                   f'stroke="black" fill="black"/>')
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)


def emit(state: SimState, out_dir, snapshots=None, wall_time: float | None = None) -> RunOutputs:
    """Write trajectory.csv, h_series.csv and SVG snapshots to ``out_dir``.

    ``snapshots`` lists step numbers; steps past the end map to the final
    state.  By default the initial and final states are drawn.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj, hs = out / "trajectory.csv", out / "h_series.csv"
    with open(traj, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", "id", "x", "y", "ux", "uy"])
        for rec in state.history:
            for i in sorted(rec.positions):
                x, y = rec.positions[i]
                ux, uy = rec.controls[i]
                w.writerow([rec.step, _g(rec.t), i, _g(x), _g(y), _g(ux), _g(uy)])
    with open(hs, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", "H", "fraction"])
        for rec in state.history:
            w.writerow([rec.step, _g(rec.t), _g(rec.H), _g(rec.fraction)])
    steps = sorted({0, state.steps} if snapshots is None else {int(s) for s in snapshots})
    paths = []
    for s in steps:
        s_eff = min(s, state.steps)
        p = out / f"snapshot_{s:06d}.svg"
        p.write_text(render_svg(_partition_at(state, s_eff), title=f"step {s_eff}"))
        paths.append(p)
    summary = {"steps": state.steps, "converged": state.converged,
               "final_H": state.report.total, "final_fraction": state.report.fraction,
               "h_max": state.report.h_max}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if wall_time is not None:
        summary["wall_time"] = wall_time
    return RunOutputs(traj, hs, tuple(paths), summary)


def read_trajectory(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV as arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {k: [] for k in header}
    for r in body:
        for k, v in zip(header, r):
            cols[k].append(v)
    return {k: np.array(v, dtype=int if k in ("step", "id") else float)
            for k, v in cols.items()}


def read_h_series(path) -> dict[str, np.ndarray]:
    return read_trajectory(path)


def write_comparison(states: dict, path) -> Path:
    """Joint H series of several runs, padded with empty cells."""
    names = sorted(states)
    series = {n: (states[n].h_series(), states[n].fraction_series()) for n in names}
    n_rows = max(len(h) for h, _ in series.values())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + [f"{c}_{n}" for n in names for c in ("H", "fraction")])
        for k in range(n_rows):
            row = [k]
            for n in names:
                h, f = series[n]
                row += [_g(h[k]), _g(f[k])] if k < len(h) else ["", ""]
            w.writerow(row)
    return Path(path)


# --- command line --------------------------------------------------------------


def _parse_steps(text: str) -> list[int]:
    try:
        steps = [int(s) for s in text.replace(" ", "").split(",") if s]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("snapshots must be comma-separated integers") from exc
    if any(s < 0 for s in steps):
        raise argparse.ArgumentTypeError("snapshot steps must be non-negative")
    return steps


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gvcover",
                                 description="Coverage simulation with guaranteed Voronoi cells.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one scenario and write outputs")
    run_p.add_argument("config")
    run_p.add_argument("--law", choices=LAWS)
    run_p.add_argument("--out", default="out")
    run_p.add_argument("--snapshots", type=_parse_steps,
                       help="comma-separated steps to draw (default: first and last)")
    run_p.add_argument("--max-steps", type=int)

    cmp_p = sub.add_parser("compare", help="run both laws and write a joint H series")
    cmp_p.add_argument("config")
    cmp_p.add_argument("--out", default="out")
    cmp_p.add_argument("--max-steps", type=int)

    val_p = sub.add_parser("validate", help="check a scenario without simulating")
    val_p.add_argument("config")
    return ap


def _load(args) -> SimConfig:
    cfg = load_config(args.config)
    over = {}
    if getattr(args, "law", None):
        over["law"] = args.law
    if getattr(args, "max_steps", None):
        if args.max_steps < 1:
            raise ValidationError("max_steps must be an integer >= 1")
        over["max_steps"] = args.max_steps
    if over:
        cfg = dataclasses.replace(cfg, **over)
    return cfg


def _cmd_run(args, cfg: SimConfig) -> int:
    t0 = time.perf_counter()
    state = simulate(cfg)
    wall = time.perf_counter() - t0
    snaps = args.snapshots if args.snapshots is not None else (list(cfg.snapshots) or None)
    emit(state, args.out, snaps, wall_time=wall)
    print(f"{cfg.name} [{cfg.law}] steps={state.steps} converged={state.converged} "
          f"fraction={state.report.fraction:.6f} time={wall:.2f}s -> {args.out}")
    return EXIT_OK


def _cmd_compare(args, cfg: SimConfig) -> int:
    states = {}
    out = Path(args.out)
    for law in LAWS:
        t0 = time.perf_counter()
        states[law] = simulate(cfg.with_law(law))
        wall = time.perf_counter() - t0
        emit(states[law], out / law, list(cfg.snapshots) or None, wall_time=wall)
        st = states[law]
        print(f"{law:>10}: steps={st.steps} converged={st.converged} "
              f"fraction={st.report.fraction:.6f} time={wall:.2f}s")
    write_comparison(states, out / "compare.csv")
    return EXIT_OK


def _cmd_validate(args, cfg: SimConfig) -> int:
    part = build_partition(cfg.agents, cfg.region, cfg.eps_arc)
    empty = sorted(i for i, c in part.cells.items() if c.is_empty)
    print(f"{cfg.name}: {len(cfg.agents)} agents, region area {cfg.region.area():.6g}, "
          f"law={cfg.law}, mode={cfg.mode}")
    if empty:
        print(f"warning: empty cells for agents {empty} (overlapping uncertainty disks)")
    print("ok")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            return _cmd_run(args, cfg)
        if args.command == "compare":
            return _cmd_compare(args, cfg)
        return _cmd_validate(args, cfg)
    except (GeometryError, DuplicatePoints, ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
