"""Configuration parsing, run orchestration and the command line.

Commands
--------
solve       --config PATH --out DIR
convergence --config PATH --cells 50,100,200,400 --out DIR
fields      --run DIR --grid NX,NY [--plane x2=0] [--band DELTA] [--time T]
sensors     --run DIR

Exit codes: 0 ok, 1 usage/config, 2 physics/validation, 3 numerical.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import manufactured, presets, runio
from .assembly import WeightAssembler, gauss_rule
from .errors import ConfigError, ConewaveError, NumericalError, PhysicsError
from .geometry import subsonic_audit
from .medium import SpeedField
from .mot import Scenario, l2l2_relative_error, march, supsup_relative_error
from .scatter import (IncidentWave, ReflectionEvents, SensorSpec, boundary_data,
                      evaluate_field, reflected_arrival, sensor_history)
from .traveltime import RadialRayTable, TravelTimeModel

log = logging.getLogger("conewave")

_KNOWN_KEYS = {
    "scenario", "solver", "level", "n_cells", "dt", "t_max", "closure",
    "quadrature_points", "newton_max_iters", "newton_tol", "samples_per_ray",
    "rynne", "smoothing", "gauss_order", "mach", "speed_value", "delta_theta",
    "band", "oversample", "vtk", "out",
}

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


@dataclass
class RunConfig:
    scenario: str
    solver: str = "sl"
    level: int = None
    n_cells: int = None
    dt: float = None
    t_max: float = None
    closure: str = None
    quadrature_points: int = None
    newton_max_iters: int = None
    newton_tol: float = None
    samples_per_ray: int = None
    rynne: bool = None
    smoothing: bool = None
    gauss_order: int = None
    mach: float = None
    speed_value: float = None
    delta_theta: float = None
    band: float = None
    oversample: int = 1
    vtk: bool = False
    out: str = None
    raw: dict = dc_field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        steps = self.t_max / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"t_max/dt = {steps} is not an integer step count")
        return int(round(steps))


def _coerce(key: str, value: str):
    if key in ("scenario", "solver", "closure", "out"):
        return str(value)
    if key in ("level", "n_cells", "quadrature_points", "newton_max_iters",
               "samples_per_ray", "gauss_order", "oversample"):
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: expected integer, got {value!r}") from exc
    if key in ("rynne", "smoothing", "vtk"):
        if isinstance(value, bool):
            return value
        if str(value).lower() not in _BOOL:
            raise ConfigError(f"key {key!r}: expected boolean, got {value!r}")
        return _BOOL[str(value).lower()]
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected number, got {value!r}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse INI-style key=value lines or a JSON object into a RunConfig."""
    text = text.strip()
    if not text:
        raise ConfigError("empty configuration: 'scenario' is required")
    items = {}
    if text.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON configuration: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("JSON configuration must be an object")
        items = {str(k): v for k, v in payload.items()}
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("[") and line.endswith("]"):
                continue
            for chunk in line.split():
                if "=" not in chunk:
                    raise ConfigError(f"line {lineno}: expected key=value, got {chunk!r}")
                key, value = chunk.split("=", 1)
                items[key.strip()] = value.strip()
    unknown = set(items) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    if "scenario" not in items:
        raise ConfigError("missing required key 'scenario'")
    scenario = str(items.pop("scenario"))
    if scenario not in presets.PRESETS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; choose from {', '.join(presets.preset_names())}"
        )
    cfg = RunConfig(scenario=scenario, raw=dict(items))
    for key, value in items.items():
        setattr(cfg, key, _coerce(key, value) if not isinstance(value, (int, float, bool)) else value)
    _apply_preset_defaults(cfg)
    cfg.n_steps  # validates integral step count
    if cfg.dt <= 0:
        raise ConfigError("dt must be positive")
    return cfg


def _apply_preset_defaults(cfg: RunConfig) -> None:
    preset = presets.PRESETS[cfg.scenario]
    if cfg.solver is None or cfg.solver == "sl":
        cfg.solver = cfg.raw.get("solver", preset.get("solver", "sl"))
    cfg.solver = str(cfg.solver).lower()
    if cfg.solver not in ("sl", "dl", "kirchhoff"):
        raise ConfigError(f"unknown solver {cfg.solver!r}")
    if preset["dim"] == 3 and cfg.level is None:
        cfg.level = preset["level"]
    if preset["dim"] == 2 and cfg.n_cells is None:
        cfg.n_cells = preset["n_cells"]
    if cfg.t_max is None:
        cfg.t_max = preset["t_max"]
    if cfg.dt is None:
        cfg.dt = preset["dt"] if preset["dt"] is not None else cfg.t_max * 2.5 / cfg.n_cells
    if cfg.closure is None:
        cfg.closure = preset["closure"]
    if cfg.rynne is None:
        cfg.rynne = preset["rynne"]
    if cfg.smoothing is None:
        cfg.smoothing = preset["smoothing"]
    if cfg.gauss_order is None:
        cfg.gauss_order = preset.get("gauss_order", 3)
    if cfg.band is None:
        cfg.band = 2.0 * cfg.dt * _field_for(cfg).bounds()[1]


def _field_for(cfg: RunConfig) -> SpeedField:
    overrides = {}
    if cfg.speed_value is not None:
        overrides["value"] = cfg.speed_value
    if cfg.delta_theta is not None:
        overrides["delta_theta"] = cfg.delta_theta
    return presets.build_field(cfg.scenario, overrides)


def build_scenario(cfg: RunConfig):
    """Instantiate the Scenario plus its wave/events context from a config."""
    preset = presets.PRESETS[cfg.scenario]
    preset = dict(preset)
    if preset["dim"] == 3:
        preset["level"] = cfg.level
    else:
        preset["n_cells"] = cfg.n_cells
    mesh = presets.build_mesh(preset)
    motion_overrides = {}
    if cfg.mach is not None:
        if preset["motion"][0] == "rising-sphere":
            motion_overrides["speed"] = cfg.mach
        elif preset["motion"][0] == "rotating-turbine-2d":
            motion_overrides["mach"] = cfg.mach
        elif preset["motion"][0] == "rigid-translation":
            vel = np.asarray(preset["motion"][1].get("velocity", (0, 0, 0)), dtype=float)
            norm = np.linalg.norm(vel)
            if norm > 0:
                motion_overrides["velocity"] = tuple(vel / norm * cfg.mach)
    motion = presets.build_motion(cfg.scenario, motion_overrides)
    fld = _field_for(cfg)
    model = TravelTimeModel(
        closure=cfg.closure,
        quadrature_points=cfg.quadrature_points or (48 if _tanh_delta(fld) < 0.1 else 16),
        newton_max_iters=cfg.newton_max_iters or 20,
        newton_tol=cfg.newton_tol or 1e-8,
        samples_per_ray=cfg.samples_per_ray or 35,
    )
    if model.closure == "newton-ray" and fld.is_radial and motion.is_static:
        model._table = _boundary_ray_table(fld, model)
    wave = presets.build_wave(preset)
    if wave is not None:
        data = lambda pos, t: boundary_data(wave, pos, t)
    else:
        times = cfg.dt * np.arange(cfg.n_steps + 1)
        oracle = (manufactured.sl_fixed_circle_value if preset["manufactured"] == "fixed-circle"
                  else manufactured.sl_expanding_circle_value)
        if cfg.solver == "dl" and preset["manufactured"] == "fixed-circle":
            oracle = manufactured.dl_fixed_circle_value
        table = manufactured.tabulate(oracle, times)
        data = lambda pos, t: np.full(pos.shape[0], np.interp(t, times, table))
    scenario = Scenario(
        mesh=mesh, motion=motion, fld=fld, model=model, dt=cfg.dt, n_steps=cfg.n_steps,
        data=data, rule=gauss_rule(cfg.gauss_order), rynne=cfg.rynne, smoothing=cfg.smoothing,
        exact_crossing=bool(preset.get("exact_crossing", False)), name=cfg.scenario,
    )
    return scenario, wave


def _tanh_delta(fld: SpeedField) -> float:
    return getattr(fld, "delta", 1.0)


def _boundary_ray_table(fld, model):
    # Collocation targets sit on the unit sphere; quadrature sources on the
    # planar facets lie within a sagitta (< 0.01 at level 3) of it.
    rx_grid = np.linspace(0.99, 1.0, 4)
    ry_grid = np.linspace(0.99, 1.0, 4)
    psi_grid = np.linspace(0.0, np.pi, 121)
    return RadialRayTable(fld, model, rx_grid, ry_grid, psi_grid, center=fld.center0)


def field_ray_table(fld, model, r_x_max: float):
    rx_grid = np.linspace(1.0, r_x_max, 16)
    ry_grid = np.linspace(0.99, 1.0, 4)
    psi_grid = np.linspace(0.0, np.pi, 91)
    return RadialRayTable(fld, model, rx_grid, ry_grid, psi_grid, center=fld.center0)


# ---------------------------------------------------------------------------
# Run orchestration
# ---------------------------------------------------------------------------
def run(cfg: RunConfig, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, "log.txt")
    handler = logging.FileHandler(log_path, mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    t_start = time.time()
    try:
        scenario, wave = build_scenario(cfg)
        t_grid = scenario.times()
        max_mach, ok, vtx, tbad = subsonic_audit(scenario.motion, scenario.mesh, scenario.fld, t_grid)
        log.info("subsonic audit: max Mach %.4f (%s)", max_mach, "pass" if ok else "FAIL")
        if not ok:
            raise PhysicsError(
                f"subsonic audit failed: Mach {max_mach:.3f} at vertex {vtx}, t={tbad:.4g}"
            )
        history = march(cfg.solver, scenario)
        runio.write_density_csv(os.path.join(out_dir, "density.csv"), history)

        events = None
        preset = presets.PRESETS[cfg.scenario]
        if wave is not None:
            events = ReflectionEvents.build(
                wave, scenario.motion, scenario.mesh, horizon=cfg.t_max + 1e-9,
                oversample=cfg.oversample if scenario.mesh.dim == 2 else 1,
            )
            for idx, (skind, anchor) in enumerate(preset.get("sensors", [])):
                spec = SensorSpec(kind=skind, anchor=anchor)
                times, vals = sensor_history(cfg.solver, history, scenario, spec, events)
                runio.write_sensor_csv(
                    os.path.join(out_dir, f"sensor_{idx}_{skind}.csv"), times, vals
                )
        if cfg.vtk and scenario.mesh.dim == 3:
            frame_pos = scenario.motion.position(scenario.mesh.vertices, cfg.t_max)
            runio.write_vtk_polydata(
                os.path.join(out_dir, "interface.vtk"), frame_pos,
                [list(tri) for tri in scenario.mesh.elements],
                point_scalars=history.as_array()[-1],
            )
        manifest = {
            "config": {k: v for k, v in cfg.__dict__.items() if k != "raw" and v is not None},
            "scenario": cfg.scenario,
            "solver": cfg.solver,
            "mesh": {
                "dim": scenario.mesh.dim,
                "n_vertices": scenario.mesh.n_vertices,
                "n_elements": scenario.mesh.n_elements,
                "h": scenario.mesh.h,
            },
            "gauss_order": cfg.gauss_order,
            "n_steps": cfg.n_steps,
            "max_mach": max_mach,
            "wall_time_s": time.time() - t_start,
            "events": 0 if events is None else int(events.times.size),
        }
        runio.write_manifest(os.path.join(out_dir, "manifest.json"), manifest)
        log.info("run complete in %.1fs", time.time() - t_start)
        return out_dir
    except ConewaveError:
        log.exception("run failed")
        raise
    finally:
        log.removeHandler(handler)
        handler.close()


def convergence(cfg: RunConfig, cells, out_dir: str) -> list:
    """Manufactured-circle refinement study; emits convergence.csv."""
    if presets.PRESETS[cfg.scenario].get("manufactured") is None:
        raise ConfigError("convergence requires a manufactured 2D scenario")
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for solver in ("sl", "dl"):
        if cfg.scenario == "manufactured-expanding-circle" and solver == "dl":
            continue
        prev = None
        for n in cells:
            sub = RunConfig(scenario=cfg.scenario, solver=solver)
            sub.n_cells = int(n)
            sub.dt = 5.0 / (2.0 * int(n))
            sub.t_max = 1.0
            _apply_preset_defaults(sub)
            sub.rynne = cfg.rynne if cfg.rynne is not None else sub.rynne
            sub.smoothing = cfg.smoothing if cfg.smoothing is not None else sub.smoothing
            scenario, _ = build_scenario(sub)
            history = march(solver, scenario)
            err = l2l2_relative_error(history, lambda t: float(manufactured.exact_density(t)))
            sup = supsup_relative_error(history, lambda t: float(manufactured.exact_density(t)))
            row = {"solver": solver, "n_cells": int(n), "dt": sub.dt,
                   "l2l2": err, "supsup": sup}
            if prev is not None:
                row["order_l2"] = np.log2(prev["l2l2"] / err)
                row["order_sup"] = np.log2(prev["supsup"] / sup)
            rows.append(row)
            prev = row
    runio.write_convergence_csv(os.path.join(out_dir, "convergence.csv"), rows)
    return rows


def fields_command(run_dir: str, grid, plane: str, band: float, t_snap: float = None) -> str:
    """Re-evaluate the scattered field on a grid from a stored run."""
    manifest = runio.read_manifest(run_dir)
    cfg = RunConfig(scenario=manifest["scenario"], solver=manifest["solver"])
    for key, val in manifest["config"].items():
        if hasattr(cfg, key) and key != "raw":
            setattr(cfg, key, val)
    _apply_preset_defaults(cfg)
    scenario, wave = build_scenario(cfg)
    times, arr = runio.read_density_csv(os.path.join(run_dir, "density.csv"))
    from .mot import DensityHistory

    levels = [arr[k] for k in range(arr.shape[0])]
    data_levels = None
    if cfg.solver == "kirchhoff":
        data_levels = [scenario.boundary_values(k) for k in range(arr.shape[0])]
    history = DensityHistory(times=times, levels=levels, stabilized=levels,
                             kind="DL" if cfg.solver == "dl" else "SL", data_levels=data_levels)
    k = scenario.n_steps if t_snap is None else int(round(t_snap / scenario.dt))
    nx, ny = grid
    bound = 3.0
    if scenario.mesh.dim == 3:
        xs = np.linspace(-bound, bound, nx)
        z_lo = -bound
        if scenario.fld.kind == "atmosphere-fireball":
            z_lo = 0.05  # the atmosphere profile is defined above the ground only
        zs = np.linspace(z_lo, bound + scenario.motion.center(cfg.t_max)[2], ny)
        gx, gz = np.meshgrid(xs, zs, indexing="ij")
        pts = np.stack([gx.ravel(), np.zeros(gx.size), gz.ravel()], axis=1)
    else:
        xs = np.linspace(-bound, bound, nx)
        ys = np.linspace(-bound, bound, ny)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    keep = ~_inside(scenario.motion, pts, k * scenario.dt)
    pts = pts[keep]
    if scenario.model.closure == "newton-ray" and scenario.fld.is_radial:
        fmodel = TravelTimeModel(closure="newton-ray")
        fmodel._table = field_ray_table(scenario.fld, scenario.model,
                                        float(np.linalg.norm(pts, axis=1).max()) + 0.2)
        eval_scenario = scenario
        eval_scenario.model = fmodel
    events = ReflectionEvents.build(wave, scenario.motion, scenario.mesh,
                                    horizon=cfg.t_max + 1e-9)
    t_rfl = reflected_arrival(scenario.model, scenario.fld, events, pts)
    phi = evaluate_field(cfg.solver, history, scenario, pts, k, band=band,
                         mode="band" if np.isfinite(band) else "interior", t_rfl=t_rfl)
    out_csv = os.path.join(run_dir, f"field_t{k * scenario.dt:.4g}.csv")
    runio.write_field_csv(out_csv, pts, k * scenario.dt, phi, t_rfl)
    runio.write_wavefront_csv(os.path.join(run_dir, "wavefront.csv"), pts, t_rfl)
    return out_csv


def _inside(motion, pts, t):
    from .scatter import _inside_obstacle

    # keep a safety margin so band evaluation stays off the interface
    if motion.dim == 3:
        rel = pts - motion.center(t)
        return np.linalg.norm(rel, axis=-1) < motion.radius + 0.05
    return _inside_obstacle(motion, pts, t) | (
        np.linalg.norm(pts, axis=-1) < (motion._radius2d(t) if motion.kind != "rotating-turbine-2d" else 1.0) + 0.05
    )


def sensors_command(run_dir: str) -> list:
    manifest = runio.read_manifest(run_dir)
    out = []
    for name in sorted(os.listdir(run_dir)):
        if name.startswith("sensor_") and name.endswith(".csv"):
            out.append(os.path.join(run_dir, name))
    if not out:
        raise ConfigError(f"run {run_dir} has no sensor outputs (scenario {manifest['scenario']})")
    return out


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------
def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="conewave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_solve = sub.add_parser("solve", help="run a scenario")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", required=True)
    p_conv = sub.add_parser("convergence", help="manufactured refinement study")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--cells", default="50,100,200,400")
    p_conv.add_argument("--out", required=True)
    p_fields = sub.add_parser("fields", help="field slice from a stored run")
    p_fields.add_argument("--run", required=True)
    p_fields.add_argument("--grid", default="41,41")
    p_fields.add_argument("--plane", default="x2=0")
    p_fields.add_argument("--band", type=float, default=np.inf)
    p_fields.add_argument("--time", type=float, default=None)
    p_sens = sub.add_parser("sensors", help="list sensor outputs of a run")
    p_sens.add_argument("--run", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "solve":
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
            run(cfg, args.out)
        elif args.command == "convergence":
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
            cells = [int(c) for c in args.cells.split(",") if c]
            convergence(cfg, cells, args.out)
        elif args.command == "fields":
            grid = tuple(int(g) for g in args.grid.split(","))
            fields_command(args.run, grid, args.plane, args.band, args.time)
        elif args.command == "sensors":
            for path in sensors_command(args.run):
                print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PhysicsError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ConewaveError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
