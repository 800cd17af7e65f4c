"""Moving-interface parametrizations and reference-surface triangulations.

The reference surface is the unit sphere S^2 (triangles) or the unit
circle S^1 (segments, parametrized by angle).  A mesh never moves: all
time dependence lives in the interface parametrization ``z(alpha, t)``,
which maps reference chart points to physical space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GeometryError, ResourceLimitError, SubsonicError

# Icosahedron golden-ratio construction; circumradius normalized to 1.
_PHI = (1.0 + np.sqrt(5.0)) / 2.0

TURBINE_SMAX_SAMPLES = 4096


# ---------------------------------------------------------------------------
# Reference meshes
# ---------------------------------------------------------------------------
@dataclass
class SurfaceMesh:
    """Triangulated S^2 (dim=3) or segmented S^1 (dim=2) reference surface.

    Attributes
    ----------
    dim : int
        Ambient dimension (3 for sphere meshes, 2 for circle meshes).
    vertices : ndarray, shape (N, dim)
        Reference positions on the unit sphere/circle.
    elements : ndarray, shape (F, 3) or (F, 2)
        Vertex indices of triangles (3D) or segments (2D).
    angles : ndarray or None
        Vertex angles for 2D meshes (None in 3D).
    """

    dim: int
    vertices: np.ndarray
    elements: np.ndarray
    angles: Optional[np.ndarray] = None
    _edges: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (E, 2)."""
        if self._edges is None:
            if self.dim == 3:
                tri = self.elements
                raw = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
            else:
                raw = self.elements.copy()
            raw.sort(axis=1)
            self._edges = np.unique(raw, axis=0)
        return self._edges

    @property
    def h(self) -> float:
        """Maximum reference edge length (chord for 3D, arc for 2D)."""
        if self.dim == 2:
            return 2.0 * np.pi / self.n_elements
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).max())

    def element_areas_spherical(self) -> np.ndarray:
        """Spherical-triangle areas (solid angles) of all elements (3D only)."""
        a = self.vertices[self.elements[:, 0]]
        b = self.vertices[self.elements[:, 1]]
        c = self.vertices[self.elements[:, 2]]
        num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
        den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
        return 2.0 * np.arctan2(num, den)

    def element_arcs_2d(self) -> np.ndarray:
        """Angular lengths of the segments (2D only)."""
        th0 = self.angles[self.elements[:, 0]]
        th1 = self.angles[self.elements[:, 1]]
        arc = np.mod(th1 - th0, 2.0 * np.pi)
        arc[arc == 0.0] = 2.0 * np.pi / self.n_elements
        return arc

    def validate(self) -> None:
        """Check manifold invariants; raises GeometryError on failure."""
        norms = np.linalg.norm(self.vertices, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise GeometryError(f"vertices off the unit sphere: max deviation {np.abs(norms - 1).max():.2e}")
        if self.dim == 3:
            v, e, f = self.n_vertices, len(self.edges), self.n_elements
            if v - e + f != 2:
                raise GeometryError(f"Euler characteristic {v - e + f} != 2")
            tri = self.elements
            raw = np.sort(np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
            _, counts = np.unique(raw, axis=0, return_counts=True)
            if not np.all(counts == 2):
                raise GeometryError("mesh is not closed: found edges not shared by exactly 2 triangles")


def icosphere_mesh(level: int) -> SurfaceMesh:
    """Subdivided icosahedron projected to the unit sphere.

    Each subdivision step quadruples the face count; V(level+1) = V + E.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > 7:
        raise ResourceLimitError(f"icosphere level {level} exceeds the supported maximum of 7")

    verts = np.array(
        [
            [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
            [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
            [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )

    for _ in range(level):
        verts_list = list(verts)
        midpoint: dict = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                p = verts_list[i] + verts_list[j]
                p = p / np.linalg.norm(p)
                midpoint[key] = len(verts_list)
                verts_list.append(p)
            return midpoint[key]

        new_faces = []
        for i, j, k in faces:
            a, b, c = mid(i, j), mid(j, k), mid(k, i)
            new_faces += [[i, a, c], [j, b, a], [k, c, b], [a, b, c]]
        verts = np.array(verts_list)
        faces = np.array(new_faces, dtype=np.int64)

    mesh = SurfaceMesh(dim=3, vertices=verts, elements=faces)
    _orient_outward(mesh)
    mesh.validate()
    return mesh


def _orient_outward(mesh: SurfaceMesh) -> None:
    """Flip triangles so every facet normal points away from the origin."""
    v = mesh.vertices
    tri = mesh.elements
    n = np.cross(v[tri[:, 1]] - v[tri[:, 0]], v[tri[:, 2]] - v[tri[:, 0]])
    centroid = (v[tri[:, 0]] + v[tri[:, 1]] + v[tri[:, 2]]) / 3.0
    flip = np.einsum("ij,ij->i", n, centroid) < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]


def circle_mesh_2d(n_cells: int) -> SurfaceMesh:
    """Uniform angular partition of the unit circle into n_cells segments."""
    if n_cells < 4:
        raise ValueError("n_cells must be at least 4")
    angles = 2.0 * np.pi * np.arange(n_cells) / n_cells
    verts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    segs = np.stack([np.arange(n_cells), (np.arange(n_cells) + 1) % n_cells], axis=1)
    return SurfaceMesh(dim=2, vertices=verts, elements=segs.astype(np.int64), angles=angles)


def load_off(path) -> SurfaceMesh:
    """Read an ASCII OFF surface mesh and renormalize vertices to S^2."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise GeometryError("not an ASCII OFF file (missing OFF header)")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise GeometryError("OFF loader supports triangle faces only")
        faces.append([int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])])
        pos += 4
    norms = np.linalg.norm(verts, axis=1)
    if np.any(norms < 1e-12):
        raise GeometryError("OFF vertex at the origin cannot be projected to the sphere")
    verts = verts / norms[:, None]
    mesh = SurfaceMesh(dim=3, vertices=verts, elements=np.array(faces, dtype=np.int64))
    _orient_outward(mesh)
    mesh.validate()
    return mesh


# ---------------------------------------------------------------------------
# Interface motions
# ---------------------------------------------------------------------------
def _turbine_radius(alpha: np.ndarray) -> np.ndarray:
    return (1.0 + 0.3 * np.exp(3.0 * np.sin(3.0 * alpha) - 1.0)) / (1.0 + 0.3 * np.e**2)


def _turbine_radius_prime(alpha: np.ndarray) -> np.ndarray:
    return 0.3 * np.exp(3.0 * np.sin(3.0 * alpha) - 1.0) * 9.0 * np.cos(3.0 * alpha) / (1.0 + 0.3 * np.e**2)


def turbine_smax() -> float:
    """Peak tangential speed functional of the reference turbine profile.

    Computed by dense sampling; used to convert a target normal Mach
    number into an angular velocity.
    """
    alpha = np.linspace(0.0, 2.0 * np.pi, TURBINE_SMAX_SAMPLES, endpoint=False)
    r = _turbine_radius(alpha)
    rp = _turbine_radius_prime(alpha)
    z1 = r * np.cos(alpha)
    z2 = r * np.sin(alpha)
    # Curve tangent and outward normal in the reference frame.
    t1 = rp * np.cos(alpha) - r * np.sin(alpha)
    t2 = rp * np.sin(alpha) + r * np.cos(alpha)
    tn = np.hypot(t1, t2)
    n1, n2 = t2 / tn, -t1 / tn
    speed = np.abs(-z2 * n1 + z1 * n2)
    return float(speed.max())


class InterfaceMotion:
    """Preset interface parametrizations z(alpha, t) with analytic velocity.

    3D kinds take chart points of shape (..., 3); 2D kinds take angle
    arrays.  Chart points need not be exactly unit norm: sphere presets
    treat them as affine chart coordinates (quadrature nodes of planar
    facets lie slightly inside S^2).
    """

    KINDS_3D = ("fixed-sphere", "rigid-translation", "rising-sphere", "custom-affine")
    KINDS_2D = ("fixed-circle-2d", "expanding-circle-2d", "rotating-turbine-2d")

    def __init__(self, kind: str, **params):
        self.kind = kind
        self.params = dict(params)
        if kind in self.KINDS_3D:
            self.dim = 3
            self.radius = float(params.get("radius", 1.0))
            center = np.asarray(params.get("center", (0.0, 0.0, 0.0)), dtype=float)
            if kind == "fixed-sphere":
                velocity = np.zeros(3)
            elif kind == "rising-sphere":
                velocity = np.array([0.0, 0.0, float(params.get("speed", 0.5))])
            elif kind == "rigid-translation":
                velocity = np.asarray(params.get("velocity", (0.0, 0.0, 0.0)), dtype=float)
            else:  # custom-affine: center path c0 + c1 t + c2 t^2
                velocity = None
                self._coeffs = np.asarray(params["center_coeffs"], dtype=float).reshape(-1, 3)
            self._center0 = center
            self._velocity = velocity
        elif kind in self.KINDS_2D:
            self.dim = 2
            if kind == "expanding-circle-2d":
                self.radius0 = float(params.get("radius", 1.0))
                self.rate = float(params.get("rate", 0.5))
            elif kind == "rotating-turbine-2d":
                self.mach_target = float(params.get("mach", 0.0))
                self.smax = turbine_smax()
                self.omega = self.mach_target / self.smax if self.mach_target > 0 else 0.0
            else:
                self.radius0 = float(params.get("radius", 1.0))
        else:
            raise ValueError(f"unknown motion kind {kind!r}")

    # -- 3D sphere-family helpers -------------------------------------
    def center(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "custom-affine":
            powers = np.stack([t**p for p in range(len(self._coeffs))], axis=-1)
            return powers @ self._coeffs
        return self._center0 + np.multiply.outer(t, self._velocity)

    def center_velocity(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "custom-affine":
            v = np.zeros(t.shape + (3,))
            for p in range(1, len(self._coeffs)):
                v += np.multiply.outer(p * t ** (p - 1), self._coeffs[p])
            return v
        return np.broadcast_to(self._velocity, t.shape + (3,)).copy()

    # -- parametrization ------------------------------------------------
    def position(self, alpha, t: float) -> np.ndarray:
        """Physical position z(alpha, t)."""
        if self.dim == 3:
            return self.center(t) + self.radius * np.asarray(alpha, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "rotating-turbine-2d":
            r = _turbine_radius(alpha)
            ref = np.stack([r * np.cos(alpha), r * np.sin(alpha)], axis=-1)
            th = self.omega * t
            rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            return ref @ rot.T
        radius = self._radius2d(t)
        return radius * np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)

    def velocity(self, alpha, t: float) -> np.ndarray:
        """Material velocity (d/dt) z(alpha, t)."""
        if self.dim == 3:
            v = self.center_velocity(t)
            return np.broadcast_to(v, np.asarray(alpha, dtype=float).shape)
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "rotating-turbine-2d":
            pos = self.position(alpha, t)
            # Rigid rotation: v = omega * J pos with J the quarter turn.
            return self.omega * np.stack([-pos[..., 1], pos[..., 0]], axis=-1)
        rate = self.rate if self.kind == "expanding-circle-2d" else 0.0
        return rate * np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)

    def normal(self, alpha, t: float) -> np.ndarray:
        """Unit normal oriented from the interior into the exterior."""
        if self.dim == 3:
            a = np.asarray(alpha, dtype=float)
            return a / np.linalg.norm(a, axis=-1, keepdims=True)
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "rotating-turbine-2d":
            r = _turbine_radius(alpha)
            rp = _turbine_radius_prime(alpha)
            t1 = rp * np.cos(alpha) - r * np.sin(alpha)
            t2 = rp * np.sin(alpha) + r * np.cos(alpha)
            tn = np.hypot(t1, t2)
            n_ref = np.stack([t2 / tn, -t1 / tn], axis=-1)
            th = self.omega * t
            rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            return n_ref @ rot.T
        return np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)

    def jacobian(self, alpha, t: float) -> np.ndarray:
        """Surface Jacobian J(alpha, t) (area/arc scale per chart measure)."""
        if self.dim == 3:
            shape = np.asarray(alpha, dtype=float).shape[:-1]
            return np.full(shape, self.radius**2)
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "rotating-turbine-2d":
            r = _turbine_radius(alpha)
            rp = _turbine_radius_prime(alpha)
            return np.hypot(r, rp)
        return np.full(alpha.shape, self._radius2d(t))

    def normal_velocity(self, alpha, t: float) -> np.ndarray:
        n = self.normal(alpha, t)
        v = self.velocity(alpha, t)
        return np.einsum("...i,...i->...", n, v)

    def _radius2d(self, t: float) -> float:
        if self.kind == "expanding-circle-2d":
            return self.radius0 + self.rate * t
        return self.radius0

    @property
    def is_static(self) -> bool:
        if self.kind in ("fixed-sphere", "fixed-circle-2d"):
            return True
        if self.kind == "rigid-translation":
            return not np.any(self._velocity)
        if self.kind == "rising-sphere":
            return self.params.get("speed", 0.5) == 0.0
        if self.kind == "rotating-turbine-2d":
            return self.omega == 0.0
        return False

    @property
    def is_rigid_uniform(self) -> bool:
        """True when z(alpha,t) = z(alpha,0) + v t (lag-stationary kernels)."""
        return self.kind in ("fixed-sphere", "rigid-translation", "rising-sphere") or (
            self.dim == 2 and self.is_static
        )


def turbine_boundary_2d(alpha, t: float, mach: float):
    """Rotating-turbine boundary point and material velocity.

    The angular speed is mach / S_max with S_max the dense-sampled peak
    tangential speed of the reference profile.
    """
    if mach < 0:
        raise ValueError("mach target must be non-negative")
    motion = InterfaceMotion("rotating-turbine-2d", mach=mach)
    return motion.position(alpha, t), motion.velocity(alpha, t)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------
@dataclass
class MeshFrame:
    """Per-time snapshot of the discrete interface at the mesh vertices."""

    t: float
    positions: np.ndarray
    vertex_normals: np.ndarray
    element_normals: Optional[np.ndarray]
    jacobians: np.ndarray
    normal_velocity: np.ndarray
    element_measure: np.ndarray


def frame_at(motion: InterfaceMotion, mesh: SurfaceMesh, t: float) -> MeshFrame:
    """Evaluate positions, normals, Jacobians and V_nu at time t."""
    if motion.dim != mesh.dim:
        raise GeometryError("motion and mesh dimensions disagree")
    if mesh.dim == 3:
        chart = mesh.vertices
        positions = motion.position(chart, t)
        vertex_normals = motion.normal(chart, t)
        jac = motion.jacobian(chart, t)
        tri = mesh.elements
        e_n = np.cross(positions[tri[:, 1]] - positions[tri[:, 0]], positions[tri[:, 2]] - positions[tri[:, 0]])
        areas2 = np.linalg.norm(e_n, axis=1)
        if np.any(areas2 <= 0) or not np.all(np.isfinite(areas2)):
            bad = int(np.argmin(areas2))
            raise GeometryError(f"degenerate physical triangle (element {bad}) at t={t}")
        element_normals = e_n / areas2[:, None]
        measure = mesh.element_areas_spherical()
    else:
        chart = mesh.angles
        positions = motion.position(chart, t)
        vertex_normals = motion.normal(chart, t)
        jac = motion.jacobian(chart, t)
        element_normals = None
        measure = mesh.element_arcs_2d()
    if np.any(jac <= 0):
        bad = int(np.argmin(jac))
        raise GeometryError(f"non-positive surface Jacobian at vertex {bad}, t={t}")
    v_nu = motion.normal_velocity(chart, t)
    return MeshFrame(
        t=t,
        positions=positions,
        vertex_normals=vertex_normals,
        element_normals=element_normals,
        jacobians=jac,
        normal_velocity=v_nu,
        element_measure=measure,
    )


def physical_h(motion: InterfaceMotion, mesh: SurfaceMesh, t: float) -> float:
    """Maximum physical edge length of the deformed mesh at time t."""
    if mesh.dim == 3:
        pos = motion.position(mesh.vertices, t)
    else:
        pos = motion.position(mesh.angles, t)
    e = mesh.edges
    return float(np.linalg.norm(pos[e[:, 0]] - pos[e[:, 1]], axis=1).max())


def subsonic_audit(motion: InterfaceMotion, mesh: SurfaceMesh, speed_field, t_grid):
    """Max normal Mach number |V_nu|/c over vertices and sampled times.

    Returns (max_mach, passed, worst_vertex, worst_time); raises nothing.
    """
    chart = mesh.vertices if mesh.dim == 3 else mesh.angles
    worst = (0.0, -1, 0.0)
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        pos = motion.position(chart, t)
        vn = np.abs(motion.normal_velocity(chart, t))
        c = speed_field.speed(pos, t)
        mach = vn / c
        i = int(np.argmax(mach))
        if mach[i] > worst[0]:
            worst = (float(mach[i]), i, float(t))
    max_mach, vertex, tbad = worst
    return max_mach, max_mach < 1.0, vertex, tbad


def require_subsonic(motion, mesh, speed_field, t_grid) -> float:
    max_mach, ok, vertex, tbad = subsonic_audit(motion, mesh, speed_field, t_grid)
    if not ok:
        raise SubsonicError(
            f"subsonic condition violated: Mach {max_mach:.3f} at vertex {vertex}, t={tbad:.6g}",
            vertex=vertex,
            time=tbad,
        )
    return max_mach
