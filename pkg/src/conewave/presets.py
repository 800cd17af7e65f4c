"""Scenario presets binding motion, medium, incident wave and defaults.

Every preset reproduces the corresponding experiment's parameters; any
field can be overridden through the run configuration.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .geometry import InterfaceMotion, circle_mesh_2d, icosphere_mesh
from .medium import SpeedField
from .scatter import IncidentWave

DOPPLER_SPEED = 0.5
FIREBALL_RISE_RATE = 7.69e-2


def _doppler_wave():
    return {"wave_kind": "gaussian-packet", "direction": (1.0, 0.0, 0.0), "x0": 1.5, "width": 0.2}


PRESETS = {
    "manufactured-fixed-circle": {
        "dim": 2, "solver": "sl", "n_cells": 200, "dt": None, "t_max": 1.0,
        "dt_rule": "5/(2N)", "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("fixed-circle-2d", {}), "rynne": False, "smoothing": False,
        "manufactured": "fixed-circle",
    },
    "manufactured-expanding-circle": {
        "dim": 2, "solver": "sl", "n_cells": 200, "dt": 0.01, "t_max": 1.0,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("expanding-circle-2d", {"radius": 1.0, "rate": 0.5}),
        "rynne": True, "smoothing": True, "manufactured": "expanding-circle",
    },
    "doppler-fixed": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 0.1, "t_max": 2.5,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("fixed-sphere", {}), "rynne": True, "smoothing": True,
        **_doppler_wave(),
        "sensors": [("fixed", (-2.0, 0.0, 0.0)), ("co-moving", (-2.0, 0.0, 0.0))],
    },
    "doppler-left": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 5.0 / 48.0, "t_max": 5.0 / 3.0,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rigid-translation", {"velocity": (-DOPPLER_SPEED, 0.0, 0.0)}),
        "rynne": True, "smoothing": True, **_doppler_wave(),
        "sensors": [("fixed", (-2.0, 0.0, 0.0)), ("co-moving", (-2.0, 0.0, 0.0))],
    },
    "doppler-right": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 0.1, "t_max": 5.0,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rigid-translation", {"velocity": (DOPPLER_SPEED, 0.0, 0.0)}),
        "rynne": True, "smoothing": True, **_doppler_wave(),
        "sensors": [("fixed", (-2.0, 0.0, 0.0)), ("co-moving", (-2.0, 0.0, 0.0))],
    },
    "doppler-rising": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 0.1, "t_max": 2.5,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rising-sphere", {"speed": DOPPLER_SPEED}),
        "rynne": True, "smoothing": True, **_doppler_wave(),
        "sensors": [("fixed", (-2.0, 0.0, 0.0)), ("co-moving", (-2.0, 0.0, 0.0))],
    },
    "mach-sweep": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 1.0 / 30.0, "t_max": 2.5,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rising-sphere", {"speed": DOPPLER_SPEED}),
        "rynne": True, "smoothing": True, "gauss_order": 6, **_doppler_wave(),
    },
    "turbine-fixed": {
        "dim": 2, "solver": "sl", "n_cells": 100, "dt": 0.04, "t_max": 4.0,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rotating-turbine-2d", {"mach": 0.0}),
        "rynne": True, "smoothing": True,
        "wave_kind": "gaussian-train", "direction": (1.0, 0.0), "x0": 1.5, "width": 0.1,
        "t_rep": 0.5, "n_pulse": 16,
    },
    "turbine-rotating": {
        "dim": 2, "solver": "sl", "n_cells": 100, "dt": 0.04, "t_max": 4.0,
        "closure": "constant", "speed": ("constant", {"value": 1.0}),
        "motion": ("rotating-turbine-2d", {"mach": 0.5}),
        "rynne": True, "smoothing": True,
        "wave_kind": "gaussian-train", "direction": (1.0, 0.0), "x0": 1.5, "width": 0.1,
        "t_rep": 0.5, "n_pulse": 16,
    },
    "gas-bubble": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 0.1, "t_max": 3.0,
        "closure": "newton-ray",
        "speed": ("tanh-inclusion", {"c_plus": 1.0, "c_minus": 0.227, "delta": 0.2,
                                     "radius": 1.0, "center": (0.0, 0.0, 0.0), "dim": 3}),
        "motion": ("fixed-sphere", {}), "rynne": True, "smoothing": True,
        **_doppler_wave(),
    },
    "time-benchmark": {
        # Rynne's one-step group delay distorts the resolved pulse at this
        # dt; implicit surface smoothing alone keeps the march stable.
        "dim": 2, "solver": "sl", "n_cells": 80, "dt": 0.05, "t_max": 3.0,
        "closure": "chord-spacetime", "exact_crossing": True,
        "speed": ("time-tanh", {"c_fin": 0.5, "ramp_time": 1.5, "ramp_rate": 5.0}),
        "motion": ("fixed-circle-2d", {}), "rynne": False, "smoothing": True,
        "wave_kind": "gaussian-packet", "direction": (1.0, 0.0), "x0": 1.5, "width": 0.2,
    },
    "fireball": {
        "dim": 3, "solver": "sl", "level": 3, "dt": 1.0, "t_max": 110.0,
        "closure": "chord-spacetime",
        "speed": ("atmosphere-fireball", {"length_scale": 100.0, "speed_scale": 340.0,
                                          "delta_theta": 1000.0, "eps0": 50.0, "radius": 1.55,
                                          "center": (0.0, 0.0, 2.323),
                                          "center_velocity": (0.0, 0.0, FIREBALL_RISE_RATE)}),
        "motion": ("rigid-translation", {"radius": 1.55, "center": (0.0, 0.0, 2.323),
                                         "velocity": (0.0, 0.0, FIREBALL_RISE_RATE)}),
        "rynne": True, "smoothing": True,
        "wave_kind": "modulated-train", "direction": (0.0, 0.0, 1.0), "x0": 5.0,
        "sigma": 3.0, "f0": 0.05, "t_rep": 15.0, "n_pulse": 20,
        "sensors": [("fixed", (10.0, 0.0, 0.0))],
    },
}


def preset_names():
    return sorted(PRESETS)


def build_motion(name: str, overrides: dict) -> InterfaceMotion:
    if name not in PRESETS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(preset_names())}")
    kind, params = PRESETS[name]["motion"]
    params = dict(params)
    params.update(overrides)
    return InterfaceMotion(kind, **params)


def build_field(name: str, overrides: dict) -> SpeedField:
    kind, params = PRESETS[name]["speed"]
    params = dict(params)
    params.update(overrides)
    return SpeedField(kind, **params)


def build_wave(preset: dict) -> IncidentWave:
    if "wave_kind" not in preset:
        return None
    kw = {"kind": preset["wave_kind"], "direction": preset["direction"], "x0": preset["x0"]}
    for key in ("width", "sigma", "f0", "t_rep", "n_pulse"):
        if key in preset:
            kw[key] = preset[key]
    return IncidentWave(**kw)


def build_mesh(preset: dict):
    if preset["dim"] == 3:
        return icosphere_mesh(int(preset["level"]))
    return circle_mesh_2d(int(preset["n_cells"]))
