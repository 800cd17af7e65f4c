"""Marching-on-time solvers with Rynne averaging and surface smoothing.

The recursion solves one dense N x N system per time level.  History
sums run over the stabilized density copies; the raw solves are kept
alongside for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import QuadratureRule, WeightAssembler, gauss_rule
from .errors import NumericalError
from .geometry import InterfaceMotion, SurfaceMesh, physical_h, require_subsonic
from .traveltime import TravelTimeModel

RYNNE_STENCIL = (0.25, 0.5, 0.25)
SMOOTH_PASSES = 10


@dataclass
class Scenario:
    """Everything march() needs: geometry, medium, closure and data."""

    mesh: SurfaceMesh
    motion: InterfaceMotion
    fld: object
    model: TravelTimeModel
    dt: float
    n_steps: int
    data: Callable[[np.ndarray, float], np.ndarray]
    rule: QuadratureRule = field(default_factory=lambda: gauss_rule(3))
    rynne: bool = True
    smoothing: bool = True
    exact_crossing: bool = False
    name: str = ""

    @property
    def t_max(self) -> float:
        return self.dt * self.n_steps

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    def boundary_values(self, k: int) -> np.ndarray:
        chart = self.mesh.vertices if self.mesh.dim == 3 else self.mesh.angles
        pos = self.motion.position(chart, k * self.dt)
        return np.asarray(self.data(pos, k * self.dt), dtype=float)


@dataclass
class DensityHistory:
    """Nodal densities per time level.

    levels are the raw solves; stabilized are the post-smoothing copies
    used in the history sums (mutated in place by Rynne averaging).
    """

    times: np.ndarray
    levels: list
    stabilized: list
    kind: str = "SL"
    data_levels: Optional[list] = None

    def as_array(self, stabilized: bool = True) -> np.ndarray:
        src = self.stabilized if stabilized else self.levels
        return np.stack(src, axis=0)


class Stabilizer:
    """Rynne time averaging plus implicit surface-heat smoothing."""

    def __init__(self, mesh: SurfaceMesh, rynne_enabled: bool = True, smoothing_enabled: bool = True,
                 n_pass: int = SMOOTH_PASSES):
        self.mesh = mesh
        self.rynne_enabled = rynne_enabled
        self.smoothing_enabled = smoothing_enabled
        self.n_pass = n_pass
        self._factor = None
        self._frame_time = None

    # -- mesh operators -------------------------------------------------
    def build(self, motion: InterfaceMotion, t: float):
        """(Re)build lumped mass, cotangent stiffness and the solver."""
        if self._frame_time is not None and motion.is_static and self._factor is not None:
            return
        mass, stiff = surface_operators(self.mesh, motion, t)
        nu = 0.5 * physical_h(motion, self.mesh, t) ** 2
        self._mass = mass
        self._factor = spla.splu((mass + nu * stiff).tocsc())
        self._frame_time = t

    def smooth(self, v: np.ndarray) -> np.ndarray:
        if not self.smoothing_enabled:
            return v
        out = v
        for _ in range(self.n_pass):
            out = self._factor.solve(self._mass @ out)
        return out

    def rynne(self, working: list, k: int) -> None:
        """Damp the temporal Nyquist mode with the 1/4(1,2,1) stencil.

        The averaged value (centered at level k-1) replaces the newest
        history entry: writing it back onto level k-1 itself amplifies
        the oscillation it is meant to damp.
        """
        if not self.rynne_enabled or k < 2:
            return
        a, b, c = RYNNE_STENCIL
        working[k] = a * working[k] + b * working[k - 1] + c * working[k - 2]


def surface_operators(mesh: SurfaceMesh, motion: InterfaceMotion, t: float):
    """Lumped mass and cotangent stiffness on the deformed mesh at t."""
    if mesh.dim == 3:
        pos = motion.position(mesh.vertices, t)
        tri = mesh.elements
        n = mesh.n_vertices
        ii, jj, vv = [], [], []
        mass = np.zeros(n)
        p0, p1, p2 = pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]]
        areas = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)
        np.add.at(mass, tri[:, 0], areas / 3.0)
        np.add.at(mass, tri[:, 1], areas / 3.0)
        np.add.at(mass, tri[:, 2], areas / 3.0)
        corners = (p0, p1, p2)
        for local, (a, b, c) in enumerate(((0, 1, 2), (1, 2, 0), (2, 0, 1))):
            pa, pb, pc = corners[a], corners[b], corners[c]
            u = pb - pa
            v = pc - pa
            cosang = np.einsum("ij,ij->i", u, v)
            sinang = np.linalg.norm(np.cross(u, v), axis=1)
            cot = cosang / np.maximum(sinang, 1e-300)
            i, j = tri[:, b], tri[:, c]
            half = 0.5 * cot
            ii += [i, j, i, j]
            jj += [j, i, i, j]
            vv += [-half, -half, half, half]
        stiff = sp.coo_matrix(
            (np.concatenate(vv), (np.concatenate(ii), np.concatenate(jj))), shape=(n, n)
        ).tocsr()
        return sp.diags(mass).tocsr(), stiff
    # 2D closed polyline: standard 1D P1 operators with periodic wrap.
    pos = motion.position(mesh.angles, t)
    segs = mesh.elements
    n = mesh.n_vertices
    lengths = np.linalg.norm(pos[segs[:, 1]] - pos[segs[:, 0]], axis=1)
    mass = np.zeros(n)
    np.add.at(mass, segs[:, 0], lengths / 2.0)
    np.add.at(mass, segs[:, 1], lengths / 2.0)
    inv = 1.0 / np.maximum(lengths, 1e-300)
    ii = np.concatenate([segs[:, 0], segs[:, 1], segs[:, 0], segs[:, 1]])
    jj = np.concatenate([segs[:, 1], segs[:, 0], segs[:, 0], segs[:, 1]])
    vv = np.concatenate([-inv, -inv, inv, inv])
    stiff = sp.coo_matrix((vv, (ii, jj)), shape=(n, n)).tocsr()
    return sp.diags(mass).tocsr(), stiff


def rynne_average(history: list, k: int) -> np.ndarray:
    """Symmetric second-order replacement for level k-1."""
    if k < 2:
        raise ValueError("rynne_average requires k >= 2")
    a, b, c = RYNNE_STENCIL
    return a * history[k] + b * history[k - 1] + c * history[k - 2]


def surface_smooth(stabilizer: Stabilizer, v: np.ndarray) -> np.ndarray:
    """n_pass implicit heat steps (M + nu L) x_{j+1} = M x_j."""
    return stabilizer.smooth(v)


def _solve_dense(matrix: np.ndarray, rhs: np.ndarray, k: int, lu=None):
    try:
        if lu is None:
            lu = sla.lu_factor(matrix)
        x = sla.lu_solve(lu, rhs)
    except (sla.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(matrix)
        raise NumericalError(f"singular current-level system at step {k} (cond ~ {cond:.3e})") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"non-finite density at step {k}")
    return x, lu


def march(kind: str, scenario: Scenario, n_steps: Optional[int] = None,
          assembler: Optional[WeightAssembler] = None) -> DensityHistory:
    """Run the MOT recursion for the SL, DL or Kirchhoff formulation."""
    kind = kind.upper()
    if kind not in ("SL", "DL", "KIRCHHOFF"):
        raise ValueError(f"unknown solver kind {kind!r}")
    K = n_steps if n_steps is not None else scenario.n_steps
    mesh, motion, fld = scenario.mesh, scenario.motion, scenario.fld
    dt = scenario.dt
    require_subsonic(motion, mesh, fld, scenario.times())

    asm = assembler or WeightAssembler(mesh, motion, fld, scenario.model, scenario.rule, dt,
                                       exact_crossing=scenario.exact_crossing)
    stab = Stabilizer(mesh, rynne_enabled=scenario.rynne, smoothing_enabled=scenario.smoothing)

    n = mesh.n_vertices
    zero = np.zeros(n)
    raw = [zero.copy()]
    working = [zero.copy()]
    data_levels = [scenario.boundary_values(0)] if kind == "KIRCHHOFF" else None
    density_kind = "SL" if kind in ("SL", "KIRCHHOFF") else "DL"

    lu = None
    for k in range(1, K + 1):
        f_k = scenario.boundary_values(k)
        rhs = f_k.copy()
        if kind == "DL":
            lam = asm.lambda_diag(k)
            current = asm.aux("DL", k, k)
            if current is None:
                raise NumericalError(f"empty current-level DL slab at step {k}; decrease dt or refine")
            lhs = 0.5 * np.diag(lam) + current.wp + current.wd
            rhs -= (current.wm - current.wd) @ working[k - 1]
            for s in range(1, k):
                blk = asm.aux("DL", k, s)
                if blk is None:
                    continue
                rhs -= blk.wd @ (working[s] - working[s - 1])
                rhs -= blk.wp @ working[s]
                rhs -= blk.wm @ working[s - 1]
        else:
            current = asm.aux("SL", k, k)
            if current is None or not np.any(current.wp):
                raise NumericalError(
                    f"empty current-level SL slab at step {k}: no quadrature node lies inside the "
                    "first cone; decrease dt or raise the Gauss order"
                )
            lhs = current.wp
            if kind == "KIRCHHOFF":
                data_levels.append(f_k)
                lam = asm.lambda_diag(k)
                rhs = (-1.0 + 0.5 * lam) * f_k
                for s in range(1, k + 1):
                    blk = asm.aux("DL", k, s)
                    if blk is None:
                        continue
                    f_s = data_levels[s]
                    f_sm1 = data_levels[s - 1] if s >= 2 else np.zeros(n)
                    rhs += blk.wd @ (f_s - f_sm1)
                    rhs += blk.wp @ f_s
                    rhs += blk.wm @ f_sm1
            rhs -= current.wm @ working[k - 1]
            for s in range(1, k):
                blk = asm.aux("SL", k, s)
                if blk is None:
                    continue
                rhs -= blk.wp @ working[s]
                rhs -= blk.wm @ working[s - 1]
        if not np.all(np.isfinite(rhs)):
            raise NumericalError(f"non-finite right-hand side at step {k}")

        if asm.lag_stationary and lu is not None:
            sol, lu = _solve_dense(lhs, rhs, k, lu=lu)
        else:
            sol, lu = _solve_dense(lhs, rhs, k)

        stab.build(motion, k * dt)
        smoothed = stab.smooth(sol)
        raw.append(sol)
        working.append(smoothed)
        stab.rynne(working, k)

    return DensityHistory(
        times=scenario.dt * np.arange(K + 1),
        levels=raw,
        stabilized=working,
        kind=density_kind,
        data_levels=data_levels,
    )


# ---------------------------------------------------------------------------
# Error norms
# ---------------------------------------------------------------------------
def l2l2_relative_error(history: DensityHistory, exact: Callable[[float], float]) -> float:
    """Relative space-time L2 error against a radially symmetric exact density."""
    num = 0.0
    den = 0.0
    values = history.as_array()
    for i, t in enumerate(history.times):
        ex = exact(float(t))
        num += np.sum((values[i] - ex) ** 2)
        den += values.shape[1] * ex**2
    return np.sqrt(num / den) if den > 0 else np.sqrt(num)


def supsup_relative_error(history: DensityHistory, exact: Callable[[float], float]) -> float:
    values = history.as_array()
    errs = [np.max(np.abs(values[i] - exact(float(t)))) for i, t in enumerate(history.times)]
    mags = [abs(exact(float(t))) for t in history.times]
    return max(errs) / max(mags)
