"""Incident waves, reflection events, wavefronts and field evaluation.

The reflected arrival time T_rfl(x) is pure causal geometry: it is the
minimum over boundary reflection events of the arrival time of a signal
emitted at that event.  Field values use the same slab-frozen weights as
the boundary collocation, with the target taken off the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .assembly import WeightAssembler
from .errors import DomainError, NumericalError
from .geometry import InterfaceMotion, SurfaceMesh
from .mot import DensityHistory, Scenario
from .traveltime import TravelTimeModel, eta

PEAK_TOL = 1e-12
NO_ARRIVAL = np.inf


@dataclass
class IncidentWave:
    """Plane-wave pulse or pulse train, normalized to unit peak.

    kinds: gaussian-packet, gaussian-train, modulated-train.  The phase
    of pulse m is  a.x - c0 (t - m T_rep) + x0.
    """

    kind: str = "gaussian-packet"
    direction: tuple = (1.0, 0.0, 0.0)
    x0: float = 1.5
    width: float = 0.2
    sigma: float = 3.0
    f0: float = 0.05
    t_rep: float = 0.5
    n_pulse: int = 1
    c0: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.direction, dtype=float)
        self.direction = tuple(a / np.linalg.norm(a))
        if self.kind == "gaussian-packet":
            self.n_pulse = 1

    def _phases(self, x, t):
        a = np.asarray(self.direction)
        base = np.tensordot(np.asarray(x, dtype=float), a, axes=([-1], [0])) - self.c0 * t + self.x0
        shifts = self.c0 * self.t_rep * np.arange(self.n_pulse)
        return base[..., None] + shifts

    def value(self, x, t):
        s = self._phases(x, t)
        if self.kind == "modulated-train":
            return np.sum(np.exp(-(s / self.sigma) ** 2) * np.cos(2 * np.pi * self.f0 * s), axis=-1)
        return np.sum(np.exp(-(s / self.width) ** 2), axis=-1)

    @property
    def envelope_halfspan(self) -> float:
        """Phase range beyond which a single pulse is negligible."""
        w = self.sigma if self.kind == "modulated-train" else self.width
        return 8.0 * w


def incident(wave: IncidentWave, x, t):
    """Incident wave value phi_inc(x, t)."""
    return wave.value(x, t)


def boundary_data(wave: IncidentWave, positions, t):
    """Sound-soft Dirichlet data F = -phi_inc on the interface."""
    return -wave.value(positions, t)


@dataclass
class SensorSpec:
    kind: str = "fixed"  # fixed | co-moving
    anchor: tuple = (-2.0, 0.0, 0.0)

    def position(self, motion: InterfaceMotion, t: float) -> np.ndarray:
        x0 = np.asarray(self.anchor, dtype=float)
        if self.kind == "fixed":
            return x0
        if motion.dim == 3:
            return x0 + motion.center(t) - motion.center(0.0)
        if motion.kind == "rotating-turbine-2d" and motion.omega != 0.0:
            th = motion.omega * t
            rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            return rot @ x0
        return x0


# ---------------------------------------------------------------------------
# Reflection source times and arrival fields
# ---------------------------------------------------------------------------
def reflection_source_times(wave: IncidentWave, motion: InterfaceMotion, beta, horizon: float,
                            tol: float = 1e-10):
    """Ordered peak-hit times of the incident envelope at boundary point beta.

    Solves a . z(beta, t) - c0 (t - m T_rep) + x0 = 0 per pulse by
    bracketed root finding; pulses whose peak never reaches the point
    within the horizon are skipped.
    """
    a = np.asarray(wave.direction[: motion.dim])

    times = []
    for m in range(wave.n_pulse):
        shift = wave.c0 * wave.t_rep * m

        def g(t):
            pos = motion.position(np.atleast_1d(beta) if motion.dim == 2 else np.asarray(beta), t)
            return float(np.dot(np.atleast_2d(pos)[0], a) - wave.c0 * t + wave.x0 + shift)

        g0 = g(0.0)
        gh = g(horizon)
        if g0 <= 0.0:
            continue  # peak already passed before t = 0
        if gh > 0.0:
            continue  # peak does not reach the point within the horizon
        t_hit = brentq(g, 0.0, horizon, xtol=tol, rtol=1e-15)
        times.append(t_hit)
    return sorted(times)


@dataclass
class ReflectionEvents:
    """Boundary emission events (y, tau) seeding the reflected front."""

    sources: np.ndarray  # (M, dim) physical emission points
    times: np.ndarray    # (M,)

    @classmethod
    def build(cls, wave: IncidentWave, motion: InterfaceMotion, mesh: SurfaceMesh, horizon: float,
              oversample: int = 1):
        if mesh.dim == 2:
            n = mesh.n_vertices * max(1, oversample)
            chart = 2.0 * np.pi * np.arange(n) / n
        else:
            chart = mesh.vertices
        pts, times = [], []
        n_chart = len(chart)
        for i in range(n_chart):
            beta = chart[i]
            hits = reflection_source_times(wave, motion, beta, horizon)
            for tau in hits:
                pos = motion.position(np.atleast_1d(beta), tau)[0] if mesh.dim == 2 else motion.position(beta, tau)
                pts.append(np.atleast_1d(pos))
                times.append(tau)
        if not pts:
            return cls(np.zeros((0, mesh.dim)), np.zeros(0))
        return cls(np.asarray(pts, dtype=float).reshape(len(pts), -1), np.asarray(times))


def reflected_arrival(model: TravelTimeModel, fld, events: ReflectionEvents, x,
                      horizon: Optional[float] = None):
    """Earliest reflected arrival time T_rfl at targets x (vectorized).

    Returns +inf where no event reaches the target within the horizon.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    n_t = xs.shape[0]
    if events.times.size == 0:
        out = np.full(n_t, NO_ARRIVAL)
        return float(out[0]) if single else out

    c_lo, c_hi = fld.bounds()
    best = np.full(n_t, NO_ARRIVAL)
    order = np.argsort(events.times)
    srcs = events.sources[order]
    taus = events.times[order]
    chunk = 512
    for lo in range(0, len(taus), chunk):
        hi = min(len(taus), lo + chunk)
        y = srcs[lo:hi]
        tau = taus[lo:hi]
        d = np.linalg.norm(xs[:, None, :] - y[None, :, :], axis=2)
        lower = tau[None, :] + d / c_hi
        cand = lower < best[:, None]
        if not np.any(cand):
            continue
        rows, cols = np.nonzero(cand)
        if model.time_dependent:
            t_arr = _arrival_fixed_point(model, fld, xs[rows], y[cols], tau[cols])
        else:
            t_arr = tau[cols] + eta(model, fld, xs[rows], tau[cols], y[cols], tau[cols])
        np.minimum.at(best, rows, t_arr)
    if horizon is not None:
        best = np.where(best <= horizon, best, NO_ARRIVAL)
    return float(best[0]) if single else best


def _arrival_fixed_point(model, fld, xs, ys, taus, iters: int = 12):
    """Vectorized arrival solve T = tau + eta(x, T; y, tau) by fixed point."""
    t = taus + eta(model, fld, xs, taus, ys, taus)
    for _ in range(iters):
        t_new = taus + eta(model, fld, xs, t, ys, taus)
        if np.max(np.abs(t_new - t)) < 1e-12:
            t = t_new
            break
        t = t_new
    return t


# ---------------------------------------------------------------------------
# Off-boundary field evaluation
# ---------------------------------------------------------------------------
def _inside_obstacle(motion: InterfaceMotion, targets: np.ndarray, t: float) -> np.ndarray:
    if motion.dim == 3:
        rel = targets - motion.center(t)
        return np.linalg.norm(rel, axis=-1) < motion.radius - 1e-12
    if motion.kind == "rotating-turbine-2d":
        th = np.arctan2(targets[:, 1], targets[:, 0]) - motion.omega * t
        from .geometry import _turbine_radius

        return np.linalg.norm(targets, axis=-1) < _turbine_radius(th) - 1e-12
    return np.linalg.norm(targets, axis=-1) < motion._radius2d(t) - 1e-12


def evaluate_field(kind: str, history: DensityHistory, scenario: Scenario, targets, k: int,
                   band: float = np.inf, mode: str = "interior",
                   t_rfl: Optional[np.ndarray] = None, events: Optional[ReflectionEvents] = None,
                   assembler: Optional[WeightAssembler] = None) -> np.ndarray:
    """Scattered potential at off-boundary targets at time level k.

    Targets ahead of the reflected front (T_rfl > t_k) return exactly
    zero; band mode further restricts to |T_rfl - t_k| <= band.
    """
    kind = kind.upper()
    targets = np.asarray(targets, dtype=float)
    t_k = k * scenario.dt
    if np.any(_inside_obstacle(scenario.motion, targets, t_k)):
        raise DomainError("field evaluation target lies inside the obstacle")
    n_t = targets.shape[0]
    values = np.zeros(n_t)
    if t_rfl is None:
        if events is None:
            raise ValueError("evaluate_field needs either t_rfl or reflection events")
        t_rfl = reflected_arrival(scenario.model, scenario.fld, events, targets)
    active = t_rfl <= t_k
    if mode == "band" and np.isfinite(band):
        active &= t_rfl >= t_k - band
    if not np.any(active):
        return values
    pts = targets[active]
    asm = assembler or WeightAssembler(
        scenario.mesh, scenario.motion, scenario.fld, scenario.model, scenario.rule, scenario.dt,
        exact_crossing=scenario.exact_crossing,
    )
    acc = np.zeros(pts.shape[0])
    hist = history.stabilized
    for s in range(1, k + 1):
        if kind in ("SL", "KIRCHHOFF"):
            blk = asm.aux_for_targets("SL", pts, t_k, k, s)
            if blk is not None:
                sign = 1.0 if kind == "SL" else -1.0
                acc += sign * (blk.wm @ hist[s - 1] + blk.wp @ hist[s])
        if kind in ("DL", "KIRCHHOFF"):
            levels = history.data_levels if kind == "KIRCHHOFF" else hist
            blk = asm.aux_for_targets("DL", pts, t_k, k, s)
            if blk is not None:
                lev_s = levels[s]
                lev_sm1 = levels[s - 1] if s >= 2 else np.zeros_like(levels[0])
                acc += blk.wd @ (lev_s - lev_sm1) + blk.wp @ lev_s + blk.wm @ lev_sm1
    values[active] = acc
    return values


def sensor_history(kind: str, history: DensityHistory, scenario: Scenario, spec: SensorSpec,
                   events: ReflectionEvents, band: float = np.inf,
                   assembler: Optional[WeightAssembler] = None):
    """Scattered potential time series at a fixed or co-moving sensor."""
    asm = assembler or WeightAssembler(
        scenario.mesh, scenario.motion, scenario.fld, scenario.model, scenario.rule, scenario.dt,
        exact_crossing=scenario.exact_crossing,
    )
    K = len(history.stabilized) - 1
    times = np.zeros(K + 1)
    vals = np.zeros(K + 1)
    for k in range(1, K + 1):
        t_k = k * scenario.dt
        x = spec.position(scenario.motion, t_k)[None, :]
        t_rfl = reflected_arrival(scenario.model, scenario.fld, events, x)
        v = evaluate_field(kind, history, scenario, x, k, band=band, mode="interior",
                           t_rfl=np.atleast_1d(t_rfl), assembler=asm)
        times[k] = t_k
        vals[k] = v[0]
    return times, vals
