"""Spatial P1 discretization and space-time weight matrices.

Collocation targets are mesh vertices; sources are element Gauss nodes
of the reference mesh mapped through the interface parametrization,
frozen at the right endpoint of each source slab.  Auxiliary per-slab
matrices (the +, - and d/dtau parts) are assembled separately and
combined by the marching loop; a lag cache kicks in automatically when
the kernel is stationary in (k - ell).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernel as kern
from . import traveltime as tt
from .errors import NumericalError
from .geometry import InterfaceMotion, SurfaceMesh
from .kernel import SlabContext

TARGET_CHUNK = 128


@dataclass(frozen=True)
class QuadratureRule:
    """Symmetric Gauss rule on the reference triangle (weights sum to 1/2)."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


def gauss_rule(order: int) -> QuadratureRule:
    """Standard symmetric triangle rules with 1, 3 or 6 points."""
    if order == 1:
        return QuadratureRule(np.array([[1 / 3, 1 / 3]]), np.array([0.5]), degree=1)
    if order == 3:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        return QuadratureRule(pts, np.full(3, 1 / 6), degree=2)
    if order == 6:
        a = 0.445948490915965
        b = 0.091576213509771
        wa = 0.223381589678011 / 2.0
        wb = 0.109951743655322 / 2.0
        pts = np.array(
            [[a, a], [1 - 2 * a, a], [a, 1 - 2 * a], [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]]
        )
        return QuadratureRule(pts, np.array([wa, wa, wa, wb, wb, wb]), degree=4)
    raise ValueError(f"unsupported triangle Gauss order {order}; choose 1, 3 or 6")


def p1_shape(xi1, xi2):
    """Nodal P1 shape functions on the reference triangle."""
    return 1.0 - xi1 - xi2, xi1, xi2


SEGMENT_POINTS_DEFAULT = 12


def segment_rule(n: int = SEGMENT_POINTS_DEFAULT):
    """Gauss-Legendre rule on [0, 1] used for 2D boundary segments.

    The effective temporal weights carry an integrable arccosh
    singularity at the collocation point; a 12-point rule resolves it
    well enough to keep the plain-quadrature marching recursion stable.
    """
    return tt.unit_gauss_legendre(n)


@dataclass
class WeightBlock:
    """Effective space-time weight matrix for one (k, ell) pair."""

    kind: str
    k: int
    ell: int
    matrix: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return self.matrix != 0.0


class AuxBlock:
    """Auxiliary nodal matrices of one slab: wm, wp and (DL) wd."""

    __slots__ = ("wm", "wp", "wd")

    def __init__(self, wm, wp, wd=None):
        self.wm = wm
        self.wp = wp
        self.wd = wd


class WeightAssembler:
    """Builds auxiliary slab matrices for a fixed scenario.

    The same machinery serves boundary collocation (targets = mesh
    vertices at t_k) and off-boundary field evaluation (arbitrary
    targets), differing only in the target array.
    """

    def __init__(self, mesh: SurfaceMesh, motion: InterfaceMotion, fld, model: tt.TravelTimeModel,
                 rule: QuadratureRule, dt: float, exact_crossing: bool = False):
        self.mesh = mesh
        self.motion = motion
        self.fld = fld
        self.model = model
        self.rule = rule
        self.dt = float(dt)
        # Place the kernel singularity at the exact cone crossing instead of
        # the endpoint-frozen travel time.  Only meaningful for static
        # interfaces with a time-dependent medium; for time-independent
        # closures the two coincide.
        self.exact_crossing = bool(exact_crossing) and motion.is_static and model.time_dependent
        self._crossing_cache: dict = {}
        c_lo, c_hi = fld.bounds()
        self.kappa_min = 1.0 / c_hi
        self.kappa_max = 1.0 / c_lo
        self._sources_static = motion.is_static and fld.is_time_independent
        # Concentric uniform rings with spatially uniform speed make every
        # boundary block circulant: one collocation row determines it.
        self._circulant = (
            mesh.dim == 2
            and motion.kind in ("fixed-circle-2d", "expanding-circle-2d")
            and fld.kind in ("constant", "time-tanh")
        )
        self._source_cache: dict = {}
        self._aux_cache: dict = {}
        self._build_reference()

    # -- reference-mesh data -------------------------------------------
    def _build_reference(self):
        mesh = self.mesh
        if mesh.dim == 3:
            tri = mesh.elements
            v = mesh.vertices
            pts, wts = self.rule.points, self.rule.weights
            phi = np.stack(p1_shape(pts[:, 0], pts[:, 1]), axis=1)  # (Q, 3)
            # Affine chart nodes on the planar facets (strictly interior).
            chart = (
                phi[None, :, 0, None] * v[tri[:, 0]][:, None, :]
                + phi[None, :, 1, None] * v[tri[:, 1]][:, None, :]
                + phi[None, :, 2, None] * v[tri[:, 2]][:, None, :]
            )  # (E, Q, 3)
            measure = mesh.element_areas_spherical()
            fac = 2.0 * measure[:, None, None] * wts[None, :, None] * phi[None, :, :]
            self._chart = chart.reshape(-1, 3)
            self._fac = fac.reshape(-1, 3)
            self._cols = np.repeat(tri, len(wts), axis=0)
            self._local_nodes = 3
        else:
            segs = mesh.elements
            th0 = mesh.angles[segs[:, 0]]
            arc = mesh.element_arcs_2d()
            xi, w = segment_rule()
            angles = th0[:, None] + arc[:, None] * xi[None, :]  # (E, Q)
            phi = np.stack([1.0 - xi, xi], axis=1)  # (Q, 2)
            fac = arc[:, None, None] * w[None, :, None] * phi[None, :, :]
            self._chart = angles.reshape(-1)
            self._fac = fac.reshape(-1, 2)
            self._cols = np.repeat(segs, len(w), axis=0)
            self._local_nodes = 2

    # -- frozen sources and targets --------------------------------------
    @property
    def lag_stationary(self) -> bool:
        if self._sources_static:
            return True
        return self.motion.is_rigid_uniform and self.fld.is_constant

    def source_data(self, s: int):
        """Frozen source quantities at t_s for every quadrature node."""
        key = 0 if self._sources_static else s
        if key not in self._source_cache:
            t_s = s * self.dt
            pos = self.motion.position(self._chart, t_s)
            jac = self.motion.jacobian(self._chart, t_s)
            nrm = self.motion.normal(self._chart, t_s)
            vel = self.motion.velocity(self._chart, t_s)
            c_src = self.fld.speed(pos, t_s)
            centroid = pos.mean(axis=0)
            radius = float(np.linalg.norm(pos - centroid, axis=1).max())
            if not self._sources_static and len(self._source_cache) > 16:
                self._source_cache.pop(next(iter(self._source_cache)))
            self._source_cache[key] = (pos, jac, nrm, vel, c_src, centroid, radius)
        return self._source_cache[key]

    def target_positions(self, k: int):
        chart = self.mesh.vertices if self.mesh.dim == 3 else self.mesh.angles
        return self.motion.position(chart, k * self.dt)

    # -- core assembly ----------------------------------------------------
    def aux(self, kind: str, k: int, s: int) -> Optional[AuxBlock]:
        """Auxiliary nodal matrices of slab s collocated at level k.

        Returns None when the slab cannot interact causally with any
        (target, source) pair.
        """
        if self.lag_stationary:
            key = (kind, k - s)
            if key in self._aux_cache:
                return self._aux_cache[key]
        targets = self.target_positions(k)
        if self._circulant:
            block = self._circulant_block(kind, targets, k, s)
        else:
            block = self.aux_for_targets(kind, targets, k * self.dt, k, s)
        if self.lag_stationary:
            self._aux_cache[(kind, k - s)] = block
        return block

    def _circulant_block(self, kind: str, targets, k: int, s: int) -> Optional[AuxBlock]:
        row = self.aux_for_targets(kind, targets[:1], k * self.dt, k, s)
        if row is None:
            return None
        n = self.mesh.n_vertices
        shift = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n

        def expand(r):
            return None if r is None else r[0][shift]

        return AuxBlock(expand(row.wm), expand(row.wp), expand(row.wd))

    def aux_for_targets(self, kind: str, targets, t_k: float, k: int, s: int) -> Optional[AuxBlock]:
        """Assemble slab-s auxiliary matrices for arbitrary target points."""
        targets = np.asarray(targets, dtype=float)
        n_t = targets.shape[0]
        n_nodes = self.mesh.n_vertices
        ctx = SlabContext(k=k, ell=s, dt=self.dt)
        pos, jac, nrm, vel, c_src, centroid, radius = self.source_data(s)

        t_centroid = targets.mean(axis=0)
        t_radius = float(np.linalg.norm(targets - t_centroid, axis=1).max())
        gap = float(np.linalg.norm(t_centroid - centroid))
        d_min = max(0.0, gap - radius - t_radius)
        d_max = gap + radius + t_radius
        if self.mesh.dim == 3:
            if d_min * self.kappa_min > ctx.theta_hi or d_max * self.kappa_max < ctx.theta_lo:
                return None
        else:
            if d_min * self.kappa_min >= ctx.theta_hi:
                return None

        need_dl = kind.upper() == "DL"
        wm_out = np.zeros((n_t, n_nodes))
        wp_out = np.zeros((n_t, n_nodes))
        wd_out = np.zeros((n_t, n_nodes)) if need_dl else None

        c_tgt = self.fld.speed(targets, t_k)
        chunk = max(8, min(TARGET_CHUNK, int(6e6 // max(1, pos.shape[0]))))
        any_hit = False
        for lo in range(0, n_t, chunk):
            hi = min(n_t, lo + chunk)
            hit = self._aux_chunk(
                kind, ctx, targets[lo:hi], c_tgt[lo:hi], t_k, pos, jac, nrm, vel, c_src,
                s * self.dt, n_nodes,
                wm_out[lo:hi], wp_out[lo:hi], wd_out[lo:hi] if need_dl else None,
            )
            any_hit = any_hit or hit
        if not any_hit:
            return None
        return AuxBlock(wm_out, wp_out, wd_out)

    def _aux_chunk(self, kind, ctx, xs, c_x, t_k, pos, jac, nrm, vel, c_src, t_s, n_nodes,
                   wm_out, wp_out, wd_out) -> bool:
        n_x = xs.shape[0]
        diff = xs[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        if self.mesh.dim == 3:
            cand = (dist * self.kappa_min <= ctx.theta_hi) & (dist * self.kappa_max >= ctx.theta_lo)
        else:
            cand = dist * self.kappa_min < ctx.theta_hi
        if not np.any(cand):
            return False
        rows, cols = np.nonzero(cand)
        x_sel = xs[rows]
        y_sel = pos[cols]
        if self.exact_crossing:
            eta_sel = self._crossing_eta(xs, pos, t_k)[rows, cols]
        else:
            eta_sel = tt.eta(self.model, self.fld, x_sel, t_k, y_sel, t_s)
        if not np.all(np.isfinite(eta_sel)):
            bad = int(np.argmax(~np.isfinite(eta_sel)))
            raise NumericalError(
                f"non-finite travel time in assembly at collocation row {rows[bad]}, "
                f"source quadrature node {cols[bad]}"
            )
        if self.mesh.dim == 3:
            keep = kern.causal_mask_3d(ctx, eta_sel)
        else:
            keep = (eta_sel > 0) & (eta_sel < ctx.theta_hi)
        if not np.any(keep):
            return False
        idx = np.nonzero(keep)[0]
        rows_i, cols_i = rows[idx], cols[idx]
        eta_i = eta_sel[idx]
        if self.mesh.dim == 3:
            amp_i = 1.0 / np.sqrt(c_x[rows_i] * c_src[cols_i])
        else:
            # 2D normalization: the constant-speed retarded kernel equals
            # G0(eta, theta) with unit prefactor (the cylindrical spreading
            # is already carried by the 1/sqrt(theta^2 - eta^2) tail), so
            # the two-point amplitude closure is 1.
            amp_i = np.ones_like(eta_i)
        jac_i = jac[cols_i]
        ones = np.ones(eta_i.shape, dtype=bool)

        if kind.upper() == "SL":
            if self.mesh.dim == 3:
                wm, wp = kern.sl_weights_3d(ctx, eta_i, amp_i, jac_i, mask=ones)
            else:
                wm, wp = kern.sl_weights_2d(ctx, eta_i, amp_i, jac_i)
            wd = None
        else:
            dnu = tt.eta_normal_derivative(
                self.model, self.fld, nrm[cols_i], x_sel[idx], t_k, y_sel[idx], t_s
            )
            if (not self.motion.is_static) or self.model.time_dependent:
                deta = tt.eta_dtau_total(
                    self.model, self.fld, vel[cols_i], x_sel[idx], t_k, y_sel[idx], t_s
                )
            else:
                deta = np.zeros_like(eta_i)
            if self.mesh.dim == 3:
                wd, wm, wp = kern.dl_weights_3d(ctx, eta_i, amp_i, jac_i, dnu, deta, mask=ones)
            else:
                wd, wm, wp = kern.dl_weights_2d(ctx, eta_i, amp_i, jac_i, dnu, deta)

        fac = self._fac[cols_i]
        node_cols = self._cols[cols_i]
        size = n_x * n_nodes
        for m in range(self._local_nodes):
            lin = rows_i * n_nodes + node_cols[:, m]
            fm = fac[:, m]
            wm_out += np.bincount(lin, weights=wm * fm, minlength=size).reshape(n_x, n_nodes)
            wp_out += np.bincount(lin, weights=wp * fm, minlength=size).reshape(n_x, n_nodes)
            if wd_out is not None:
                wd_out += np.bincount(lin, weights=wd * fm, minlength=size).reshape(n_x, n_nodes)
        return True

    def _crossing_eta(self, xs, pos, t_k: float):
        """Exact backward-cone crossing theta for every (target, source).

        Solves theta = eta(x, t_k; y, t_k - theta) by bisection; the root
        is independent of the slab index and is cached per collocation
        level.  Requires a static interface.
        """
        key = (round(t_k / self.dt), xs.shape[0], xs.tobytes()[:64])
        if key in self._crossing_cache:
            return self._crossing_cache[key]
        diff = xs[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        if self.fld.kind in ("constant", "time-tanh"):
            # Spatially uniform speed: eta = d q(t, tau), so the crossing
            # depends on the pair distance alone; solve on a 1D grid.
            d_grid = np.linspace(0.0, float(dist.max()) * 1.0001 + 1e-12, 769)
            root_grid = self._bisect_crossing(
                np.zeros((len(d_grid), xs.shape[-1])),
                np.column_stack([d_grid] + [np.zeros(len(d_grid))] * (xs.shape[-1] - 1)),
                d_grid, t_k,
            )
            root = np.interp(dist, d_grid, root_grid)
        else:
            x_b = np.broadcast_to(xs[:, None, :], diff.shape).reshape(-1, xs.shape[-1])
            y_b = np.broadcast_to(pos[None, :, :], diff.shape).reshape(-1, xs.shape[-1])
            root = self._bisect_crossing(x_b, y_b, dist.reshape(-1), t_k).reshape(dist.shape)
        self._crossing_cache[key] = root
        if len(self._crossing_cache) > 3:
            self._crossing_cache.pop(next(iter(self._crossing_cache)))
        return root

    def _bisect_crossing(self, x_b, y_b, dist, t_k):
        lo = dist * self.kappa_min * 0.5
        hi = dist * self.kappa_max * 1.5 + self.dt
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            g = mid - tt.eta(self.model, self.fld, x_b, t_k, y_b, t_k - mid)
            take = g >= 0
            hi = np.where(take, mid, hi)
            lo = np.where(take, lo, mid)
        return 0.5 * (lo + hi)

    # -- public effective block (spec surface) ---------------------------
    def effective_block(self, kind: str, k: int, ell: int) -> WeightBlock:
        """Effective weight matrix combining slab ell(+) and slab ell+1(-)."""
        if not 1 <= ell <= k:
            raise ValueError("require 1 <= ell <= k")
        n = self.mesh.n_vertices
        cur = self.aux(kind, k, ell)
        mat = np.zeros((n, n))
        if cur is not None:
            mat += cur.wp
            if kind.upper() == "DL":
                mat += cur.wd
        if ell < k:
            nxt = self.aux(kind, k, ell + 1)
            if nxt is not None:
                mat += nxt.wm
                if kind.upper() == "DL":
                    mat -= nxt.wd
        return WeightBlock(kind=kind, k=k, ell=ell, matrix=mat)

    def lambda_diag(self, k: int) -> np.ndarray:
        """Jump-coefficient diagonal at the collocation vertices."""
        chart = self.mesh.vertices if self.mesh.dim == 3 else self.mesh.angles
        t_k = k * self.dt
        pos = self.motion.position(chart, t_k)
        c = self.fld.speed(pos, t_k)
        v = self.motion.normal_velocity(chart, t_k)
        return kern.jump_lambda(c, v)


def assemble_block(kind: str, k: int, ell: int, motion, model, fld, mesh, rule, dt) -> WeightBlock:
    """One-shot effective block assembly (convenience wrapper)."""
    asm = WeightAssembler(mesh, motion, fld, model, rule, dt)
    return asm.effective_block(kind, k, ell)
