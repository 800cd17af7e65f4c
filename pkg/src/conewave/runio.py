"""Run-directory input/output: CSV schemas, manifest, legacy VTK."""

from __future__ import annotations

import json
import os

import numpy as np

FLOAT_FMT = "%.17g"


def write_density_csv(path, history):
    times = history.times
    arr = history.as_array()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,t,vertex,value\n")
        for k in range(arr.shape[0]):
            t = times[k]
            for v in range(arr.shape[1]):
                fh.write(f"{k},{FLOAT_FMT % t},{v},{FLOAT_FMT % arr[k, v]}\n")


def read_density_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    k = data["k"].astype(int)
    v = data["vertex"].astype(int)
    n_steps = k.max()
    n_vert = v.max() + 1
    arr = np.zeros((n_steps + 1, n_vert))
    arr[k, v] = data["value"]
    times = np.zeros(n_steps + 1)
    times[k] = data["t"]
    return times, arr


def write_sensor_csv(path, times, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,value\n")
        for t, v in zip(times, values):
            fh.write(f"{FLOAT_FMT % t},{FLOAT_FMT % v}\n")


def write_field_csv(path, points, t, phi, t_rfl):
    points = np.atleast_2d(points)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,z,t,phi,Trfl\n")
        for i in range(points.shape[0]):
            x, y = points[i, 0], points[i, 1]
            z = points[i, 2] if points.shape[1] == 3 else 0.0
            fh.write(
                f"{FLOAT_FMT % x},{FLOAT_FMT % y},{FLOAT_FMT % z},"
                f"{FLOAT_FMT % t},{FLOAT_FMT % phi[i]},{FLOAT_FMT % t_rfl[i]}\n"
            )


def write_wavefront_csv(path, points, t_rfl):
    points = np.atleast_2d(points)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,z,Trfl\n")
        for i in range(points.shape[0]):
            x, y = points[i, 0], points[i, 1]
            z = points[i, 2] if points.shape[1] == 3 else 0.0
            fh.write(f"{FLOAT_FMT % x},{FLOAT_FMT % y},{FLOAT_FMT % z},{FLOAT_FMT % t_rfl[i]}\n")


def write_convergence_csv(path, rows):
    """rows: list of dicts with solver, n_cells, dt, l2l2, supsup, order_l2, order_sup."""
    cols = ["solver", "n_cells", "dt", "l2l2", "supsup", "order_l2", "order_sup"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(str(row.get(c, "")) for c in cols) + "\n")


def write_manifest(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_manifest(run_dir):
    with open(os.path.join(run_dir, "manifest.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


# ---------------------------------------------------------------------------
# Legacy ASCII VTK (optional outputs)
# ---------------------------------------------------------------------------
def write_vtk_polydata(path, points, polys, point_scalars=None, name="density"):
    points = np.atleast_2d(points)
    if points.shape[1] == 2:
        points = np.column_stack([points, np.zeros(len(points))])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\nconewave surface\nASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {len(points)} double\n")
        for p in points:
            fh.write(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
        size = sum(len(p) + 1 for p in polys)
        fh.write(f"POLYGONS {len(polys)} {size}\n")
        for p in polys:
            fh.write(" ".join([str(len(p))] + [str(int(i)) for i in p]) + "\n")
        if point_scalars is not None:
            fh.write(f"POINT_DATA {len(points)}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in point_scalars:
                fh.write(f"{v:.9g}\n")


def write_vtk_structured_points(path, origin, spacing, dims, scalars, name="phi"):
    nx, ny, nz = dims
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\nconewave field\nASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
        fh.write(f"ORIGIN {origin[0]:.9g} {origin[1]:.9g} {origin[2]:.9g}\n")
        fh.write(f"SPACING {spacing[0]:.9g} {spacing[1]:.9g} {spacing[2]:.9g}\n")
        fh.write(f"POINT_DATA {nx * ny * nz}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n")
        for v in np.asarray(scalars).reshape(-1, order="F"):
            fh.write(f"{v:.9g}\n")
